//! Multiple zeta values of rational polyhedral cones, states carrying
//! finite-order characters, channel transforms by integer matrices, and a
//! relation-preservation harness.
//!
//! A [`RationalCone`] is stored as primitive integer generator directions;
//! it is *simplicial* when the generators are linearly independent.  Lattice
//! points of the (relative) interior are enumerated exactly: for simplicial
//! cones a point is interior iff its generator coefficients — recovered by a
//! scaled adjugate, so the per-point test is pure integer arithmetic — are
//! all strictly positive; for non-simplicial full-dimensional cones the
//! facet normals are computed once from `(n−1)`-subsets of generators and a
//! point is interior iff every facet pairing is strictly positive.
//!
//! A [`ConeState`] bundles a cone with `k` rational linear forms and a
//! finite-order character `v ↦ e(⟨θ, v⟩)`.  Its zeta value is the truncated
//! sum `Σ e(⟨θ,v⟩)/(ℓ_1(v)···ℓ_k(v))` over interior lattice points, cut off
//! by the cone's canonical height form (see [`canonical_height`]) so that
//! states over the same cone are always compared at matched point sets.
//! Every truncation carries an explicit tail bound derived from the shell
//! count `N(t) ≤ c·t^n` and the per-point decay `h^{-k'}`, where `k'` counts
//! the forms bounded below by a multiple of the height; when `k' ≤ n` the
//! bound is reported as infinite rather than silently dropped.
//!
//! Channel transforms precompose every form with an integer matrix that
//! maps the cone into itself ([`channel_transform`]); they compose
//! contravariantly, and because the truncation height belongs to the cone,
//! a transformed state is summed over exactly the same truncated point set
//! as the original — which is what makes scaling identities hold to float
//! precision instead of only up to tail terms.  [`relation_check`] uses
//! this to verify that polynomial relations between cone zeta values are
//! preserved by a channel, reporting both residuals with combined tails.

use std::collections::BTreeSet;

use num::complex::Complex64;
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::arith::lcm;
use crate::cyclotomic::RootOfUnity;
use crate::error::Error;
use crate::multivar::IntMatrix;
use crate::numerics::NeumaierSum;
use crate::zlin;

/// A finitely generated convex cone with rational generators, stored as
/// primitive integer direction vectors (deduplicated, order preserved).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCone {
    dim: usize,
    generators: Vec<Vec<BigInt>>,
    simplicial: bool,
}

impl RationalCone {
    /// A cone in dimension `dim ≥ 1` spanned by the given nonzero rational
    /// generators.  Each generator is scaled to its primitive integer
    /// representative; duplicates (equal rays) are dropped.
    pub fn new(dim: usize, generators: Vec<Vec<BigRational>>) -> Self {
        assert!(dim >= 1, "ambient dimension must be at least 1");
        assert!(!generators.is_empty(), "a cone needs at least one generator");
        let mut primitive: Vec<Vec<BigInt>> = Vec::new();
        for g in &generators {
            assert_eq!(g.len(), dim, "generator length must match the dimension");
            assert!(
                g.iter().any(|c| !c.is_zero()),
                "generators must be nonzero"
            );
            let p = primitive_direction(g);
            if !primitive.contains(&p) {
                primitive.push(p);
            }
        }
        let rank = rational_rank(
            &primitive
                .iter()
                .map(|g| g.iter().map(|c| BigRational::from_integer(c.clone())).collect())
                .collect::<Vec<_>>(),
        );
        let simplicial = rank == primitive.len();
        RationalCone {
            dim,
            generators: primitive,
            simplicial,
        }
    }

    /// Convenience constructor from integer generator tuples.
    pub fn from_integer_generators(dim: usize, generators: &[Vec<i64>]) -> Self {
        RationalCone::new(
            dim,
            generators
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|&c| BigRational::from_integer(BigInt::from(c)))
                        .collect()
                })
                .collect(),
        )
    }

    /// The nonnegative orthant `R_+^n`, generated by the standard basis.
    pub fn orthant(dim: usize) -> Self {
        let generators = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| if i == j { 1 } else { 0 })
                    .collect::<Vec<i64>>()
            })
            .collect::<Vec<_>>();
        RationalCone::from_integer_generators(dim, &generators)
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Primitive integer generator directions, deduplicated.
    pub fn generators(&self) -> &[Vec<BigInt>] {
        &self.generators
    }

    /// Whether the stored generators are linearly independent.
    pub fn is_simplicial(&self) -> bool {
        self.simplicial
    }
}

/// Scales a rational vector to its primitive integer direction (clears
/// denominators, divides by the content).
fn primitive_direction(v: &[BigRational]) -> Vec<BigInt> {
    let mut den = BigInt::one();
    for c in v {
        den = big_lcm(&den, c.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|c| (c * &den).to_integer()).collect();
    let mut content = BigInt::zero();
    for c in &ints {
        content = big_gcd(&content, c);
    }
    ints.iter().map(|c| c / &content).collect()
}

fn big_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    use num::Integer;
    a.gcd(b)
}

fn big_lcm(a: &BigInt, b: &BigInt) -> BigInt {
    use num::Integer;
    a.lcm(b)
}

/// Exact rank of a rational matrix by Gaussian elimination.
fn rational_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut work: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = work.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for col in 0..cols {
        let Some(pivot) = (rank..work.len()).find(|&r| !work[r][col].is_zero()) else {
            continue;
        };
        work.swap(rank, pivot);
        let lead = work[rank][col].clone();
        for r in rank + 1..work.len() {
            if work[r][col].is_zero() {
                continue;
            }
            let factor = &work[r][col] / &lead;
            for c in col..cols {
                let delta = &factor * &work[rank][c];
                work[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

/// Row indices of a maximal independent row set of an integer matrix.
fn pivot_rows(rows: &[Vec<BigInt>]) -> Vec<usize> {
    let rational: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|c| BigRational::from_integer(c.clone())).collect())
        .collect();
    let mut work: Vec<(usize, Vec<BigRational>)> = rational.into_iter().enumerate().collect();
    let cols = work.first().map_or(0, |(_, r)| r.len());
    let mut picked = Vec::new();
    let mut next = 0usize;
    for col in 0..cols {
        let Some(pivot) = (next..work.len()).find(|&r| !work[r].1[col].is_zero()) else {
            continue;
        };
        work.swap(next, pivot);
        picked.push(work[next].0);
        let lead = work[next].1[col].clone();
        for r in next + 1..work.len() {
            if work[r].1[col].is_zero() {
                continue;
            }
            let factor = &work[r].1[col] / &lead;
            for c in col..cols {
                let delta = &factor * &work[next].1[c];
                work[r].1[c] -= delta;
            }
        }
        next += 1;
    }
    picked
}

/// Adjugate of a square integer matrix: `adj(M)·M = det(M)·I`.
fn adjugate(mat: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = mat.len();
    if n == 0 {
        return Vec::new();
    }
    let mut adj = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let minor: Vec<Vec<BigInt>> = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != i)
                        .map(|c| mat[r][c].clone())
                        .collect()
                })
                .collect();
            let cofactor = zlin::det(&minor);
            adj[i][j] = if (i + j) % 2 == 0 { cofactor } else { -cofactor };
        }
    }
    adj
}

/// All `size`-element index subsets of `0..n`, in lexicographic order.
fn index_subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == size {
            out.push(current.clone());
            return;
        }
        for i in start..n {
            current.push(i);
            recurse(i + 1, n, size, current, out);
            current.pop();
        }
    }
    recurse(0, n, size, &mut current, &mut out);
    out
}

/// A vector orthogonal to the rows of an `(n−1)×n` integer matrix, as the
/// generalized cross product of its rows (signed maximal minors).
fn cross_normal(rows: &[Vec<BigInt>], dim: usize) -> Vec<BigInt> {
    if dim == 1 {
        return vec![BigInt::one()];
    }
    (0..dim)
        .map(|j| {
            let minor: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| {
                    (0..dim)
                        .filter(|&c| c != j)
                        .map(|c| r[c].clone())
                        .collect()
                })
                .collect();
            let d = zlin::det(&minor);
            if j % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect()
}

fn big_to_i128(x: &BigInt) -> i128 {
    x.to_i128().expect("cone data exceeds the supported magnitude")
}

/// Precomputed exact membership test for (relative) interior and closure.
enum MembershipOracle {
    /// Independent generators: a point belongs iff its coefficient vector
    /// (recovered through the scaled adjugate of an invertible row block) is
    /// positive (interior) or nonnegative (closure), and — when the cone is
    /// lower-dimensional — the remaining rows are consistent.
    Simplicial {
        rows: Vec<usize>,
        scaled_adj: Vec<Vec<i128>>,
        abs_det: i128,
        /// Full generator matrix (`dim × r`), present only when `r < dim`
        /// so span membership needs an explicit consistency check.
        consistency: Option<Vec<Vec<i128>>>,
    },
    /// Full-dimensional non-simplicial cone: primitive inward facet
    /// normals; interior iff all pairings are strictly positive.
    Facets(Vec<Vec<i128>>),
}

impl MembershipOracle {
    fn build(cone: &RationalCone) -> MembershipOracle {
        let n = cone.dim;
        let r = cone.generators.len();
        // Generator matrix with generators as columns.
        let matrix: Vec<Vec<BigInt>> = (0..n)
            .map(|row| (0..r).map(|col| cone.generators[col][row].clone()).collect())
            .collect();
        if cone.simplicial {
            let rows = pivot_rows(&matrix);
            assert_eq!(rows.len(), r, "independent generators must give full column rank");
            let block: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|&row| matrix[row].clone())
                .collect();
            let det = zlin::det(&block);
            assert!(!det.is_zero());
            let sign = if det.is_negative() { -1i64 } else { 1 };
            let adj = adjugate(&block);
            let scaled_adj: Vec<Vec<i128>> = adj
                .iter()
                .map(|row| row.iter().map(|c| big_to_i128(c) * sign as i128).collect())
                .collect();
            let abs_det = big_to_i128(&det).abs();
            let consistency = (r < n).then(|| {
                matrix
                    .iter()
                    .map(|row| row.iter().map(big_to_i128).collect())
                    .collect()
            });
            MembershipOracle::Simplicial {
                rows,
                scaled_adj,
                abs_det,
                consistency,
            }
        } else {
            let rank = rows_rank_int(&cone.generators);
            assert_eq!(
                rank, n,
                "dependent generator sets must span the ambient space; drop redundant \
                 generators or restate the cone inside its span"
            );
            let mut normals: BTreeSet<Vec<BigInt>> = BTreeSet::new();
            for subset in index_subsets(r, n - 1) {
                let rows: Vec<Vec<BigInt>> = subset
                    .iter()
                    .map(|&i| cone.generators[i].clone())
                    .collect();
                let u = cross_normal(&rows, n);
                if u.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let mut pos = false;
                let mut neg = false;
                for g in &cone.generators {
                    let dot: BigInt = u.iter().zip(g).map(|(a, b)| a * b).sum();
                    if dot.is_positive() {
                        pos = true;
                    } else if dot.is_negative() {
                        neg = true;
                    }
                }
                if pos && neg {
                    continue;
                }
                let oriented = if neg { u.iter().map(|c| -c).collect() } else { u };
                normals.insert(primitive_direction(
                    &oriented
                        .iter()
                        .map(|c| BigRational::from_integer(c.clone()))
                        .collect::<Vec<_>>(),
                ));
            }
            let normals: Vec<Vec<i128>> = normals
                .into_iter()
                .map(|u| u.iter().map(big_to_i128).collect())
                .collect();
            MembershipOracle::Facets(normals)
        }
    }

    /// Membership of an integer point; `strict` selects the (relative)
    /// interior, otherwise the closed cone.
    fn contains(&self, v: &[i64], strict: bool) -> bool {
        match self {
            MembershipOracle::Simplicial {
                rows,
                scaled_adj,
                abs_det,
                consistency,
            } => {
                let selected: Vec<i128> = rows.iter().map(|&i| v[i] as i128).collect();
                let coeffs: Vec<i128> = scaled_adj
                    .iter()
                    .map(|row| row.iter().zip(&selected).map(|(a, b)| a * b).sum())
                    .collect();
                let ok = if strict {
                    coeffs.iter().all(|c| *c > 0)
                } else {
                    coeffs.iter().all(|c| *c >= 0)
                };
                if !ok {
                    return false;
                }
                match consistency {
                    None => true,
                    Some(matrix) => matrix.iter().zip(v).all(|(row, &vj)| {
                        let rebuilt: i128 = row.iter().zip(&coeffs).map(|(m, c)| m * c).sum();
                        rebuilt == abs_det * vj as i128
                    }),
                }
            }
            MembershipOracle::Facets(normals) => normals.iter().all(|u| {
                let dot: i128 = u.iter().zip(v).map(|(a, &b)| a * b as i128).sum();
                if strict {
                    dot > 0
                } else {
                    dot >= 0
                }
            }),
        }
    }
}

fn rows_rank_int(rows: &[Vec<BigInt>]) -> usize {
    rational_rank(
        &rows
            .iter()
            .map(|r| r.iter().map(|c| BigRational::from_integer(c.clone())).collect())
            .collect::<Vec<_>>(),
    )
}

/// Evaluates a rational linear form on an integer generator.
fn form_on_generator(form: &[BigRational], g: &[BigInt]) -> BigRational {
    form.iter()
        .zip(g)
        .map(|(c, x)| c * BigRational::from_integer(x.clone()))
        .sum()
}

/// Strict positivity on every generator — required of *height* forms so
/// that each truncation `ℓ_h ≤ hmax` contains finitely many points.
fn check_height_form(cone: &RationalCone, form: &[BigRational]) -> Result<(), Error> {
    assert_eq!(form.len(), cone.dim, "form length must match the dimension");
    for g in &cone.generators {
        if !form_on_generator(form, g).is_positive() {
            return Err(Error::NonPositiveHeightForm);
        }
    }
    Ok(())
}

/// Positivity on the open cone — required of *state* forms.  Testable
/// characterization: nonnegative on every generator and strictly positive
/// at the interior sample `Σ v_i` (a form vanishing anywhere inside would
/// go negative just behind that point, contradicting nonnegativity).
fn check_state_form(cone: &RationalCone, form: &[BigRational]) -> Result<(), Error> {
    assert_eq!(form.len(), cone.dim, "form length must match the dimension");
    let mut sample_value = BigRational::zero();
    for g in &cone.generators {
        let v = form_on_generator(form, g);
        if v.is_negative() {
            return Err(Error::NonPositiveHeightForm);
        }
        sample_value += v;
    }
    if !sample_value.is_positive() {
        return Err(Error::NonPositiveHeightForm);
    }
    Ok(())
}

/// The cone's intrinsic height form, used by [`mzv_cone`] for truncation:
/// for simplicial cones the sum of the dual coefficient functionals (each
/// generator has height exactly 1); for non-simplicial cones the sum of the
/// primitive facet normals.  Strictly positive on the cone minus the
/// origin, and independent of any state data — so states over the same cone
/// are always truncated to the same point set.
pub fn canonical_height(cone: &RationalCone) -> Vec<BigRational> {
    let oracle = MembershipOracle::build(cone);
    match &oracle {
        MembershipOracle::Simplicial {
            rows,
            scaled_adj,
            abs_det,
            ..
        } => {
            let mut form = vec![BigRational::zero(); cone.dim];
            for (i, &row) in rows.iter().enumerate() {
                let mut colsum = 0i128;
                for adj_row in scaled_adj {
                    colsum += adj_row[i];
                }
                form[row] = BigRational::new(BigInt::from(colsum), BigInt::from(*abs_det));
            }
            form
        }
        MembershipOracle::Facets(normals) => {
            let mut form = vec![BigRational::zero(); cone.dim];
            for u in normals {
                for (f, &c) in form.iter_mut().zip(u) {
                    *f += BigRational::from_integer(BigInt::from(c));
                }
            }
            form
        }
    }
}

/// Exact per-coordinate box radii `hmax·β_j` with
/// `β_j = Σ_i |g_{i,j}| / ℓ_h(g_i)`: every cone point of height ≤ hmax has
/// `|v_j| ≤ hmax·β_j`.
fn box_ratios(cone: &RationalCone, height: &[BigRational]) -> Vec<BigRational> {
    (0..cone.dim)
        .map(|j| {
            let mut beta = BigRational::zero();
            for g in &cone.generators {
                let h = form_on_generator(height, g);
                beta += BigRational::from_integer(g[j].abs()) / h;
            }
            beta
        })
        .collect()
}

/// Streams every interior lattice point with `ℓ_h(v) ≤ hmax` to `visit`,
/// in ascending lexicographic order; returns the number of points.
fn scan_points<F: FnMut(&[i64])>(
    cone: &RationalCone,
    hmax: u64,
    height: &[BigRational],
    mut visit: F,
) -> Result<usize, Error> {
    assert!(hmax >= 1, "height cap must be at least 1");
    check_height_form(cone, height)?;
    let oracle = MembershipOracle::build(cone);
    let (hw, hs) = integer_form(height);
    let cap = hmax as i128 * hs;
    let bounds: Vec<i64> = box_ratios(cone, height)
        .iter()
        .map(|beta| {
            (beta * BigRational::from_integer(BigInt::from(hmax)))
                .floor()
                .to_integer()
                .to_i64()
                .expect("truncation box exceeds the supported magnitude")
        })
        .collect();
    let mut v: Vec<i64> = bounds.iter().map(|b| -b).collect();
    let mut count = 0usize;
    loop {
        let h: i128 = hw.iter().zip(&v).map(|(w, &x)| w * x as i128).sum();
        if h >= 1 && h <= cap && oracle.contains(&v, true) {
            visit(&v);
            count += 1;
        }
        // Odometer increment, rightmost coordinate fastest.
        let mut pos = v.len();
        loop {
            if pos == 0 {
                return Ok(count);
            }
            pos -= 1;
            if v[pos] < bounds[pos] {
                v[pos] += 1;
                break;
            }
            v[pos] = -bounds[pos];
        }
    }
}

/// Clears denominators of a rational form: returns `(w, s)` with integer
/// coefficients `w` and positive denominator `s` so that `ℓ(v) = ⟨w,v⟩/s`.
fn integer_form(form: &[BigRational]) -> (Vec<i128>, i128) {
    let mut den = BigInt::one();
    for c in form {
        den = big_lcm(&den, c.denom());
    }
    let w = form
        .iter()
        .map(|c| big_to_i128(&(c * &den).to_integer()))
        .collect();
    (w, big_to_i128(&den))
}

/// All interior lattice points of the cone with `ℓ_h(v) ≤ hmax`, in
/// ascending lexicographic order.  The height form must be strictly
/// positive on every generator; dependent generator sets are supported only
/// when they span the ambient space.
pub fn cone_points(
    cone: &RationalCone,
    hmax: u64,
    height_form: &[BigRational],
) -> Result<Vec<Vec<i64>>, Error> {
    let mut out = Vec::new();
    scan_points(cone, hmax, height_form, |v| out.push(v.to_vec()))?;
    Ok(out)
}

/// A cone equipped with `k` positive rational linear forms and a
/// finite-order character `v ↦ e(⟨θ, v⟩)`; the functional data of a cone
/// zeta value `Σ χ(v)/∏ℓ_i(v)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeState {
    cone: RationalCone,
    forms: Vec<Vec<BigRational>>,
    theta: Vec<BigRational>,
}

impl ConeState {
    /// Bundles a cone, forms, and character exponents `θ ∈ (Q/Z)^n`
    /// (reduced into `[0,1)`).  Every form must be positive on the open
    /// cone: nonnegative on each generator and positive at the interior
    /// sample point.
    pub fn new(
        cone: RationalCone,
        forms: Vec<Vec<BigRational>>,
        theta: Vec<BigRational>,
    ) -> Result<Self, Error> {
        assert!(!forms.is_empty(), "a state needs at least one form");
        assert_eq!(theta.len(), cone.dim, "character length must match the dimension");
        for f in &forms {
            check_state_form(&cone, f)?;
        }
        let theta = theta.iter().map(|t| t - t.floor()).collect();
        Ok(ConeState { cone, forms, theta })
    }

    /// A state with the trivial character.
    pub fn with_trivial_character(
        cone: RationalCone,
        forms: Vec<Vec<BigRational>>,
    ) -> Result<Self, Error> {
        let theta = vec![BigRational::zero(); cone.dim];
        ConeState::new(cone, forms, theta)
    }

    /// The underlying cone.
    pub fn cone(&self) -> &RationalCone {
        &self.cone
    }

    /// The linear forms in the denominator product.
    pub fn forms(&self) -> &[Vec<BigRational>] {
        &self.forms
    }

    /// Character exponents, reduced into `[0, 1)`.
    pub fn theta(&self) -> &[BigRational] {
        &self.theta
    }
}

/// The exact character value `e(⟨θ, v⟩)` as a root of unity.
pub fn character_phase(theta: &[BigRational], v: &[i64]) -> RootOfUnity {
    assert_eq!(theta.len(), v.len(), "character and point dimension mismatch");
    let mut acc = BigRational::zero();
    for (t, &x) in theta.iter().zip(v) {
        acc += t * BigRational::from_integer(BigInt::from(x));
    }
    rational_to_root(&acc)
}

/// Reduces a rational number modulo 1 into a root-of-unity label.
fn rational_to_root(r: &BigRational) -> RootOfUnity {
    let frac = r - r.floor();
    let num = frac
        .numer()
        .to_u64()
        .expect("character numerator exceeds the supported magnitude");
    let den = frac
        .denom()
        .to_u64()
        .expect("character denominator exceeds the supported magnitude");
    RootOfUnity::new(num, den)
}

/// A truncated cone zeta value with its explicit tail bound.
#[derive(Clone, Debug)]
pub struct MzvValue {
    /// The truncated sum `Σ e(⟨θ,v⟩)/∏ℓ_i(v)` over canonical heights ≤ hmax.
    pub value: Complex64,
    /// Rigorous bound on the discarded tail; `f64::INFINITY` when too few
    /// forms are bounded below by the height for the comparison series to
    /// converge.
    pub tail_bound: f64,
    /// Number of lattice points summed.
    pub points: usize,
}

/// The truncated cone zeta value of a state, cut off at canonical height
/// `hmax`.  Errors with the convergence warning when the form count `k`
/// does not exceed the dimension `n` (the comparison series `Σ h^{n−1−k}`
/// would diverge); use [`mzv_cone_unchecked`] to override.
pub fn mzv_cone(state: &ConeState, hmax: u64) -> Result<MzvValue, Error> {
    let k = state.forms.len();
    let n = state.cone.dim;
    if k <= n {
        return Err(Error::ConvergenceWarning { k, n });
    }
    mzv_cone_unchecked(state, hmax)
}

/// [`mzv_cone`] without the convergence heuristic: always sums the
/// truncation, reporting an infinite tail bound when no finite comparison
/// bound is available.
pub fn mzv_cone_unchecked(state: &ConeState, hmax: u64) -> Result<MzvValue, Error> {
    let height = canonical_height(&state.cone);

    // Character table at the common denominator of the exponents: the phase
    // of a point is an exact residue, embedded through one table lookup.
    let mut order = 1u64;
    for t in &state.theta {
        let den = t
            .denom()
            .to_u64()
            .expect("character denominator exceeds the supported magnitude");
        order = lcm(order, den);
    }
    let residues: Vec<i128> = state
        .theta
        .iter()
        .map(|t| {
            let den = t.denom().to_u64().unwrap();
            let num = t.numer().to_u64().unwrap();
            (num * (order / den)) as i128
        })
        .collect();
    let table: Vec<Complex64> = (0..order)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / order as f64))
        .collect();

    let scaled_forms: Vec<(Vec<i128>, f64)> = state
        .forms
        .iter()
        .map(|f| {
            let (w, s) = integer_form(f);
            (w, s as f64)
        })
        .collect();

    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    let points = scan_points(&state.cone, hmax, &height, |v| {
        let mut phase: i128 = 0;
        for (r, &x) in residues.iter().zip(v) {
            phase += r * x as i128;
        }
        let phase = phase.rem_euclid(order as i128) as usize;
        let mut denom = 1.0f64;
        for (w, s) in &scaled_forms {
            let dot: i128 = w.iter().zip(v).map(|(a, &b)| a * b as i128).sum();
            denom *= dot as f64 / s;
        }
        let chi = table[phase];
        re.add(chi.re / denom);
        im.add(chi.im / denom);
    })?;

    Ok(MzvValue {
        value: Complex64::new(re.total(), im.total()),
        tail_bound: tail_bound(state, &height, hmax),
        points,
    })
}

/// Tail bound for the discarded points of canonical height `> hmax`.
///
/// Let `r_i = min_g ℓ_i(g)/ℓ_h(g)` over the generators.  On the cone
/// `ℓ_i(v) ≥ r_i·h`, and every form also satisfies `ℓ_i(v) ≥ 1/s_i` on
/// interior lattice points (an integer pairing is at least 1).  With
/// `k' = #{i : r_i > 0}` and the box count `N(t) ≤ c_N·t^n`, partial
/// summation gives `tail ≤ a·c_N·k'/(k'−n)·hmax^{n−k'}` — finite only when
/// `k' > n`, otherwise reported as infinite.
fn tail_bound(state: &ConeState, height: &[BigRational], hmax: u64) -> f64 {
    let n = state.cone.dim;
    let mut a = 1.0f64;
    let mut effective_k = 0usize;
    for f in &state.forms {
        let mut ratio: Option<BigRational> = None;
        for g in &state.cone.generators {
            let r = form_on_generator(f, g) / form_on_generator(height, g);
            ratio = Some(match ratio {
                None => r,
                Some(old) => {
                    if r < old {
                        r
                    } else {
                        old
                    }
                }
            });
        }
        let ratio = ratio.unwrap();
        if ratio.is_positive() {
            effective_k += 1;
            a /= ratio.to_f64().unwrap();
        } else {
            // Bounded below only by the lattice gap 1/s on interior points.
            let (_, s) = integer_form(f);
            a *= s as f64;
        }
    }
    if effective_k <= n {
        return f64::INFINITY;
    }
    let c_n: f64 = box_ratios(&state.cone, height)
        .iter()
        .map(|beta| 2.0 * beta.to_f64().unwrap() + 1.0)
        .product();
    a * c_n * effective_k as f64 / (effective_k - n) as f64
        * (hmax as f64).powi(n as i32 - effective_k as i32)
}

/// Precomposes every form of the state with an integer matrix that maps the
/// cone into itself: `ℓ_i ↦ ℓ_i ∘ m`, character unchanged.  The matrix must
/// be nonsingular, send every generator into the closed cone, and send the
/// interior sample strictly inside; otherwise the channel is undefined and
/// the cone-not-preserved error is returned.  Transforms compose
/// contravariantly: applying `m₁` then `m₂` equals applying `m₁·m₂`.
pub fn channel_transform(state: &ConeState, m: &IntMatrix) -> Result<ConeState, Error> {
    let n = state.cone.dim;
    assert_eq!(m.n(), n, "matrix size must match the ambient dimension");
    if m.det().is_zero() {
        return Err(Error::ConeNotPreserved);
    }
    let oracle = MembershipOracle::build(&state.cone);
    let as_i64 = |v: &[BigInt]| -> Vec<i64> {
        v.iter()
            .map(|c| c.to_i64().expect("generator image exceeds the supported magnitude"))
            .collect()
    };
    for g in &state.cone.generators {
        let image = m.times_vector(g);
        if !oracle.contains(&as_i64(&image), false) {
            return Err(Error::ConeNotPreserved);
        }
    }
    let mut sample = vec![BigInt::zero(); n];
    for g in &state.cone.generators {
        for (s, c) in sample.iter_mut().zip(g) {
            *s += c;
        }
    }
    let image = m.times_vector(&sample);
    if !oracle.contains(&as_i64(&image), true) {
        return Err(Error::ConeNotPreserved);
    }
    let forms = state
        .forms
        .iter()
        .map(|f| compose_form(f, m))
        .collect::<Vec<_>>();
    ConeState::new(state.cone.clone(), forms, state.theta.clone())
}

/// Coefficients of `ℓ ∘ m`: `(ℓ∘m)_j = Σ_i ℓ_i·m[i][j]`.
fn compose_form(form: &[BigRational], m: &IntMatrix) -> Vec<BigRational> {
    let n = m.n();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|i| &form[i] * BigRational::from_integer(m.entry(i, j).clone()))
                .sum()
        })
        .collect()
}

/// Residuals of a polynomial relation between cone zeta values, before and
/// after a channel transform.
#[derive(Clone, Debug)]
pub struct RelationReport {
    /// |Σ coeff·∏ζ| at the untransformed states.
    pub original_residual: f64,
    /// Combined truncation tails of the untransformed evaluation.
    pub original_tail: f64,
    /// |Σ coeff·∏ζ| after transforming every factor by the matrix.
    pub transformed_residual: f64,
    /// Combined truncation tails of the transformed evaluation.
    pub transformed_tail: f64,
    /// Whether both residuals are below tolerance plus their tails.
    pub passes: bool,
}

/// Evaluates a polynomial relation `Σ_t coeff_t·∏_j ζ(state_{t,j}) = 0`
/// twice — as given, and with every factor transformed by `m` — at the
/// common truncation height `hmax`, and reports both residuals with
/// combined tail bounds.  Factors over the same cone are automatically
/// summed over matched point sets because truncation uses the canonical
/// height of each factor's cone.
pub fn relation_check(
    terms: &[(BigRational, Vec<ConeState>)],
    m: &IntMatrix,
    hmax: u64,
    tol: f64,
) -> Result<RelationReport, Error> {
    let evaluate = |transform: bool| -> Result<(f64, f64), Error> {
        let mut total = Complex64::new(0.0, 0.0);
        let mut tail_sum = 0.0f64;
        for (coeff, factors) in terms {
            let mut values = Vec::with_capacity(factors.len());
            let mut tails = Vec::with_capacity(factors.len());
            for state in factors {
                let evaluated = if transform {
                    mzv_cone(&channel_transform(state, m)?, hmax)?
                } else {
                    mzv_cone(state, hmax)?
                };
                values.push(evaluated.value);
                tails.push(evaluated.tail_bound);
            }
            let product = values.iter().fold(Complex64::new(1.0, 0.0), |p, v| p * v);
            // |Δ(∏)| ≤ Σ_j e_j·∏_{l≠j}(|v_l| + e_l).
            let mut product_err = 0.0f64;
            for j in 0..values.len() {
                let mut others = 1.0f64;
                for l in 0..values.len() {
                    if l != j {
                        others *= values[l].norm() + tails[l];
                    }
                }
                product_err += tails[j] * others;
            }
            let c = coeff.to_f64().unwrap();
            total += product * c;
            tail_sum += c.abs() * product_err;
        }
        Ok((total.norm(), tail_sum))
    };
    let (original_residual, original_tail) = evaluate(false)?;
    let (transformed_residual, transformed_tail) = evaluate(true)?;
    let passes = original_residual <= tol + original_tail
        && transformed_residual <= tol + transformed_tail;
    Ok(RelationReport {
        original_residual,
        original_tail,
        transformed_residual,
        transformed_tail,
        passes,
    })
}
