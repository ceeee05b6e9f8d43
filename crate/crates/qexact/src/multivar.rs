//! Multivariable cyclotomic completions and the matrix-semigroup crossed
//! product.
//!
//! The single-variable machinery of [`crate::habiro`] and [`crate::bc_core`]
//! extends to `n` variables: the finite-level ring
//! `Z[q_1..q_n] / ((q_1)_N, …, (q_n)_N)` carries an action of the semigroup
//! of integer `n×n` matrices with positive determinant by monomial
//! substitution `q_i -> ∏_j q_j^{α_ij}` ([`multi_sigma`]), and the group ring
//! of `(Q/Z)^n` carries the dual transpose action ([`multi_sigma_qz`]) with a
//! transfer-averaging partial inverse ([`multi_rho`]).
//!
//! Integer linear algebra (Smith and Hermite normal forms) replaces the
//! one-variable gcd bookkeeping: [`preimage_solutions`] solves `α(s) ≡ r` on
//! `(Q/Z)^n` with exactly `det(α)` solutions, [`hnf_enumerate`] lists the
//! canonical coset representatives of determinant `d`, and [`partition_II1`]
//! sums `det^{-β}` over those cosets, converging to `∏_{k<n} ζ(β−k)`.
//!
//! The isometries `μ_α: ε_β -> ε_{αβ}` and the diagonal action of group-ring
//! elements are realized on a finite listed sub-basis by [`pi_rep`], with the
//! same validity bookkeeping as the one-variable [`crate::bc_core::pi_rho`].
//! Finally, [`GroupoidFn`] models finite-support functions on pairs
//! `(matrix, units-vector mod N)` with groupoid convolution, determinant-phase
//! time evolution, and the low-temperature Gibbs value [`groupoid_gibbs`].

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::{BigRational, Ratio};
use num::traits::{One, Signed, ToPrimitive, Zero};
use num::Integer;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{divisors, gcd};
use crate::bc_core::{CycMatrix, TruncatedAction};
use crate::cyclotomic::{CycInt, RootOfUnity};
use crate::error::Error;
use crate::habiro::pochhammer;
use crate::numerics::{NeumaierSum, PartialZeta};
use crate::poly::IntPoly;
use crate::zlin;

// ---------------------------------------------------------------------------
// Integer matrices
// ---------------------------------------------------------------------------

/// A square integer matrix with its determinant computed on construction.
///
/// Semigroup operations ([`multi_sigma`], [`multi_rho`], [`pi_rep`], …)
/// additionally require `det > 0`; the type itself only requires squareness
/// so that unimodular transforms and transposes can be represented too.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    rows: Vec<Vec<BigInt>>,
    det: BigInt,
}

impl IntMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Self {
        Self::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(BigInt::from).collect())
                .collect(),
        )
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let n = rows.len();
        assert!(n >= 1, "empty matrix");
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let det = zlin::det(&rows);
        IntMatrix { n, rows, det }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_rows(zlin::identity(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn transpose(&self) -> IntMatrix {
        let rows = (0..self.n)
            .map(|j| (0..self.n).map(|i| self.rows[i][j].clone()).collect())
            .collect();
        Self::from_rows(rows)
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.n, other.n);
        Self::from_rows(zlin::mat_mul(&self.rows, &other.rows))
    }

    pub fn is_identity(&self) -> bool {
        self.rows == zlin::identity(self.n)
    }

    /// Row sums `(Σ_j a_ij)_i` — the image of the all-ones vector.
    pub fn row_sums(&self) -> Vec<BigInt> {
        self.rows.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn times_vector(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.n);
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.n).map(|i| self.rows[i][j].clone()).collect()
    }

    /// Exact integer solution `x` of `self · x = other` (columnwise), i.e.
    /// the matrix `self⁻¹ · other` when it happens to be integral.
    pub fn solve_right(&self, other: &IntMatrix) -> Option<IntMatrix> {
        assert_eq!(self.n, other.n);
        let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(self.n);
        for j in 0..self.n {
            let (x, _) = zlin::solve_integer(&self.rows, &other.column(j))?;
            cols.push(x);
        }
        let rows = (0..self.n)
            .map(|i| (0..self.n).map(|j| cols[j][i].clone()).collect())
            .collect();
        Some(Self::from_rows(rows))
    }
}

impl std::fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let body: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|c| c.to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", body.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct IntMatrixDto {
    rows: Vec<Vec<String>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect())
            .collect();
        IntMatrixDto { rows }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let dto = IntMatrixDto::deserialize(deserializer)?;
        let mut rows = Vec::with_capacity(dto.rows.len());
        for r in &dto.rows {
            let mut row = Vec::with_capacity(r.len());
            for c in r {
                row.push(c.parse::<BigInt>().map_err(D::Error::custom)?);
            }
            rows.push(row);
        }
        if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
            return Err(D::Error::custom("matrix must be square and nonempty"));
        }
        Ok(IntMatrix::from_rows(rows))
    }
}

/// Exact Smith normal form `α = U · D · V` with `U`, `V` unimodular and `D`
/// diagonal with each entry dividing the next.
pub fn snf(alpha: &IntMatrix) -> Result<(IntMatrix, IntMatrix, IntMatrix), Error> {
    if alpha.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let sm = zlin::smith_normal_form(&alpha.rows);
    Ok((
        IntMatrix::from_rows(sm.pinv),
        IntMatrix::from_rows(sm.d),
        IntMatrix::from_rows(sm.qinv),
    ))
}

// ---------------------------------------------------------------------------
// Multivariable finite-level ring
// ---------------------------------------------------------------------------

/// Element of `Z[q_1..q_n]` reduced modulo the ideal generated by the
/// per-variable products `(q_i − 1)(q_i² − 1)···(q_i^N − 1)` at level `N`.
/// Canonical representatives keep every exponent below `N(N+1)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiHabiroElt {
    nvars: usize,
    level: u32,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

fn degree_cap(level: u32) -> u32 {
    level * (level + 1) / 2
}

/// Rewrite polynomial for one variable: the canonical representative of
/// `q^cap` modulo the level-`N` generator (which has unit leading
/// coefficient `(−1)^N`).
fn power_rewrite(level: u32) -> IntPoly {
    let g = pochhammer(level);
    let cap = degree_cap(level) as usize;
    let lead = g.coeff(cap);
    debug_assert!(lead.abs().is_one());
    // lead·q^cap + g̃ = g ⟹ q^cap ≡ −lead·g̃ (mod g), using lead = ±1.
    let coeffs: Vec<BigInt> = (0..cap).map(|k| -(&lead * g.coeff(k))).collect();
    IntPoly::new(coeffs)
}

impl MultiHabiroElt {
    /// Builds an element from raw terms `(exponent vector, coefficient)` and
    /// reduces to canonical form.
    pub fn from_raw_terms<I>(nvars: usize, level: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (Vec<u32>, BigInt)>,
    {
        assert!(nvars >= 1 && level >= 1);
        let mut out = MultiHabiroElt {
            nvars,
            level,
            terms: BTreeMap::new(),
        };
        let mut work: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector has wrong arity");
            merge_term(&mut work, e, c);
        }
        out.terms = reduce_terms(level, work);
        out
    }

    pub fn zero(nvars: usize, level: u32) -> Self {
        Self::from_raw_terms(nvars, level, std::iter::empty())
    }

    pub fn one(nvars: usize, level: u32) -> Self {
        Self::from_raw_terms(nvars, level, [(vec![0; nvars], BigInt::one())])
    }

    /// The variable `q_i` (zero-based index).
    pub fn var(nvars: usize, level: u32, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = vec![0u32; nvars];
        e[i] = 1;
        Self::from_raw_terms(nvars, level, [(e, BigInt::one())])
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_compat(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "arity mismatch");
        assert_eq!(self.level, other.level, "level mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_compat(other);
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            merge_term(&mut terms, e.clone(), c.clone());
        }
        MultiHabiroElt {
            nvars: self.nvars,
            level: self.level,
            terms,
        }
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        MultiHabiroElt {
            nvars: self.nvars,
            level: self.level,
            terms,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars, self.level);
        }
        let terms = self.terms.iter().map(|(e, k)| (e.clone(), k * c)).collect();
        MultiHabiroElt {
            nvars: self.nvars,
            level: self.level,
            terms,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_compat(other);
        let mut work: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                merge_term(&mut work, e, c1 * c2);
            }
        }
        MultiHabiroElt {
            nvars: self.nvars,
            level: self.level,
            terms: reduce_terms(self.level, work),
        }
    }
}

fn merge_term(map: &mut BTreeMap<Vec<u32>, BigInt>, e: Vec<u32>, c: BigInt) {
    if c.is_zero() {
        return;
    }
    match map.get_mut(&e) {
        Some(entry) => {
            *entry += c;
            if entry.is_zero() {
                map.remove(&e);
            }
        }
        None => {
            map.insert(e, c);
        }
    }
}

/// Reduces exponents below the cap in every variable by repeatedly applying
/// the single-variable rewrite rule; terminates because each rewrite strictly
/// lowers the degree in the variable it touches.
fn reduce_terms(
    level: u32,
    mut work: BTreeMap<Vec<u32>, BigInt>,
) -> BTreeMap<Vec<u32>, BigInt> {
    let cap = degree_cap(level);
    let rw = power_rewrite(level);
    loop {
        let offender = work
            .iter()
            .find_map(|(e, _)| e.iter().position(|&x| x >= cap).map(|i| (e.clone(), i)));
        let Some((e, i)) = offender else {
            work.retain(|_, c| !c.is_zero());
            return work;
        };
        let c = work.remove(&e).unwrap();
        if c.is_zero() {
            continue;
        }
        let mut base = e.clone();
        base[i] -= cap;
        for (k, rc) in rw.coeffs().iter().enumerate() {
            if rc.is_zero() {
                continue;
            }
            let mut e2 = base.clone();
            e2[i] += k as u32;
            merge_term(&mut work, e2, &c * rc);
        }
    }
}

/// The exact inverse of `q` modulo the level-`N` generator: since the
/// generator has constant term 1, `(1 − generator)/q` is a polynomial `h`
/// with `q·h ≡ 1`.
pub fn q_inverse(level: u32) -> IntPoly {
    let g = pochhammer(level);
    let one_minus = IntPoly::one().sub(&g);
    debug_assert!(one_minus.coeff(0).is_zero());
    let coeffs: Vec<BigInt> = (1..=one_minus.degree().unwrap_or(0))
        .map(|k| one_minus.coeff(k))
        .collect();
    IntPoly::new(coeffs)
}

/// Monomial substitution `q_i ↦ ∏_j q_j^{α_ij}` applied to the canonical
/// representative, then reduced back to canonical form at the same level.
/// Negative total exponents are eliminated through the exact modular inverse
/// of the variable.
///
/// Caveats at a fixed finite level: for diagonal (more generally monomial)
/// matrices this is a ring endomorphism of the quotient and composes as
/// `σ_β ∘ σ_α = σ_{αβ}`; for matrices with cross-variable rows the
/// substituted ideal generators land outside the ideal (the full action
/// lives on the projective system of levels), so composition holds only up
/// to an ideal-defect term that vanishes under [`multi_ev`] at any tuple of
/// roots with orders within the level. Both facts are pinned by tests.
pub fn multi_sigma(f: &MultiHabiroElt, alpha: &IntMatrix) -> MultiHabiroElt {
    let n = f.nvars();
    assert_eq!(alpha.n(), n, "matrix arity mismatch");
    assert!(alpha.det() > &BigInt::zero(), "determinant must be positive");
    let g = pochhammer(f.level());
    let inv = q_inverse(f.level());
    let mut acc = MultiHabiroElt::zero(n, f.level());
    for (e, c) in f.terms() {
        // Image of this monomial: ∏_j q_j^{E_j} with E_j = Σ_i e_i α_ij.
        let mut term = MultiHabiroElt::from_raw_terms(n, f.level(), [(vec![0; n], c.clone())]);
        for j in 0..n {
            let mut exp = BigInt::zero();
            for (i, ei) in e.iter().enumerate() {
                exp += BigInt::from(*ei) * alpha.entry(i, j);
            }
            let exp = exp.to_i64().expect("substituted exponent overflow");
            let factor = if exp >= 0 {
                IntPoly::monomial(exp as usize, BigInt::one())
                    .rem(&g)
                    .expect("generator has unit leading coefficient")
            } else {
                inv.pow((-exp) as u32)
                    .rem(&g)
                    .expect("generator has unit leading coefficient")
            };
            term = term.mul(&univariate_in(n, f.level(), j, &factor));
        }
        acc = acc.add(&term);
    }
    acc
}

fn univariate_in(nvars: usize, level: u32, j: usize, p: &IntPoly) -> MultiHabiroElt {
    MultiHabiroElt::from_raw_terms(
        nvars,
        level,
        p.coeffs().iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(k, c)| {
            let mut e = vec![0u32; nvars];
            e[j] = k as u32;
            (e, c.clone())
        }),
    )
}

/// Evaluates at a tuple of roots of unity, landing in the cyclotomic integers
/// of the least common order. Well defined because every per-variable ideal
/// generator vanishes at roots of order up to the level.
pub fn multi_ev(f: &MultiHabiroElt, z: &[RootOfUnity]) -> Result<CycInt, Error> {
    assert_eq!(z.len(), f.nvars(), "root tuple arity mismatch");
    for zi in z {
        if zi.order() > f.level() as u64 {
            return Err(Error::OrderExceedsLevel {
                order: zi.order(),
                level: f.level(),
            });
        }
    }
    let m = z.iter().fold(1u64, |acc, zi| acc.lcm(&zi.order()));
    let mut out = CycInt::zero(m);
    for (e, c) in f.terms() {
        let mut root = RootOfUnity::one();
        for (zi, ei) in z.iter().zip(e) {
            root = root.mul(&zi.pow(*ei as u64));
        }
        out = out.add(&root.as_cyc_int().embed_to(m).scale(c));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Group ring of (Q/Z)^n and the matrix actions
// ---------------------------------------------------------------------------

/// Element of the rational group ring of `(Q/Z)^n`: finite sums
/// `Σ c · e(r⃗)` with componentwise-addition convolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiQZElt {
    nvars: usize,
    terms: BTreeMap<Vec<RootOfUnity>, BigRational>,
}

impl MultiQZElt {
    pub fn zero(nvars: usize) -> Self {
        MultiQZElt {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::basis(vec![RootOfUnity::one(); nvars])
    }

    pub fn basis(r: Vec<RootOfUnity>) -> Self {
        assert!(!r.is_empty());
        let nvars = r.len();
        Self::from_terms(nvars, [(r, BigRational::one())])
    }

    pub fn from_terms<I>(nvars: usize, iter: I) -> Self
    where
        I: IntoIterator<Item = (Vec<RootOfUnity>, BigRational)>,
    {
        let mut terms: BTreeMap<Vec<RootOfUnity>, BigRational> = BTreeMap::new();
        for (r, c) in iter {
            assert_eq!(r.len(), nvars, "label arity mismatch");
            if c.is_zero() {
                continue;
            }
            let entry = terms.entry(r).or_insert_with(BigRational::zero);
            *entry += c;
        }
        terms.retain(|_, c| !c.is_zero());
        MultiQZElt { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<RootOfUnity>, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        Self::from_terms(
            self.nvars,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(r, c)| (r.clone(), c.clone())),
        )
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(r, c)| (r.clone(), -c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_terms(self.nvars, self.terms.iter().map(|(r, k)| (r.clone(), k * c)))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out: Vec<(Vec<RootOfUnity>, BigRational)> = Vec::new();
        for (r1, c1) in &self.terms {
            for (r2, c2) in &other.terms {
                let r: Vec<RootOfUnity> = r1.iter().zip(r2).map(|(a, b)| a.mul(b)).collect();
                out.push((r, c1 * c2));
            }
        }
        Self::from_terms(self.nvars, out)
    }
}

fn root_to_rational(r: &RootOfUnity) -> BigRational {
    BigRational::new(BigInt::from(r.numerator()), BigInt::from(r.denominator()))
}

fn rational_to_root(x: &BigRational) -> RootOfUnity {
    let frac = x - x.floor();
    let num = frac.numer().to_u64().expect("label numerator overflow");
    let den = frac.denom().to_u64().expect("label denominator overflow");
    RootOfUnity::new(num, den)
}

/// All solutions `s ∈ (Q/Z)^n` of `α(s) ≡ r (mod 1)`, via the Smith form:
/// with `α = U·D·V`, the solutions are `s = V⁻¹·t` where
/// `t_i = ((U⁻¹r)_i + j_i)/d_i` and `j_i` ranges over `0..d_i`. There are
/// exactly `det(α)` of them and they are pairwise distinct.
pub fn preimage_solutions(alpha: &IntMatrix, r: &[RootOfUnity]) -> Vec<Vec<RootOfUnity>> {
    let n = alpha.n();
    assert_eq!(r.len(), n, "label arity mismatch");
    assert!(alpha.det() > &BigInt::zero(), "determinant must be positive");
    let sm = zlin::smith_normal_form(&alpha.rows);
    // w = U⁻¹·r = p·r, exactly.
    let rv: Vec<BigRational> = r.iter().map(root_to_rational).collect();
    let w: Vec<BigRational> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from(sm.p[i][j].clone()) * &rv[j])
                .sum()
        })
        .collect();
    let d: Vec<BigInt> = (0..n).map(|i| sm.d[i][i].clone()).collect();
    assert!(d.iter().all(|di| di > &BigInt::zero()));
    let mut solutions = Vec::new();
    let mut counter = vec![BigInt::zero(); n];
    loop {
        let t: Vec<BigRational> = (0..n)
            .map(|i| (&w[i] + BigRational::from(counter[i].clone())) / BigRational::from(d[i].clone()))
            .collect();
        // s = V⁻¹·t = q·t, reduced mod 1.
        let s: Vec<RootOfUnity> = (0..n)
            .map(|i| {
                let si: BigRational = (0..n)
                    .map(|j| BigRational::from(sm.q[i][j].clone()) * &t[j])
                    .sum();
                rational_to_root(&si)
            })
            .collect();
        solutions.push(s);
        // Mixed-radix increment of the counter over ∏ d_i states.
        let mut i = 0;
        loop {
            if i == n {
                return solutions;
            }
            counter[i] += 1;
            if counter[i] < d[i] {
                break;
            }
            counter[i] = BigInt::zero();
            i += 1;
        }
    }
}

/// The transpose action on group-ring labels: `e(r⃗) ↦ e(αᵀ r⃗ mod 1)`.
/// (The transpose is forced by the diagonal matrix representation; see
/// [`pi_rep`] and its oracle tests.)
pub fn multi_sigma_qz(x: &MultiQZElt, alpha: &IntMatrix) -> MultiQZElt {
    let n = x.nvars();
    assert_eq!(alpha.n(), n);
    MultiQZElt::from_terms(
        n,
        x.terms().iter().map(|(r, c)| {
            let rv: Vec<BigRational> = r.iter().map(root_to_rational).collect();
            let label: Vec<RootOfUnity> = (0..n)
                .map(|j| {
                    let sj: BigRational = (0..n)
                        .map(|i| BigRational::from(alpha.entry(i, j).clone()) * &rv[i])
                        .sum();
                    rational_to_root(&sj)
                })
                .collect();
            (label, c.clone())
        }),
    )
}

/// Transfer averaging `e(r⃗) ↦ (1/det α) Σ e(s⃗)` over the preimages of the
/// transpose action, so that [`multi_sigma_qz`] composed after it is the
/// identity.
pub fn multi_rho(x: &MultiQZElt, alpha: &IntMatrix) -> MultiQZElt {
    let n = x.nvars();
    assert_eq!(alpha.n(), n);
    assert!(alpha.det() > &BigInt::zero(), "determinant must be positive");
    let at = alpha.transpose();
    let weight = BigRational::new(BigInt::one(), alpha.det().clone());
    let mut out: Vec<(Vec<RootOfUnity>, BigRational)> = Vec::new();
    for (r, c) in x.terms() {
        for s in preimage_solutions(&at, r) {
            out.push((s, c * &weight));
        }
    }
    MultiQZElt::from_terms(n, out)
}

// ---------------------------------------------------------------------------
// Matrix representation on a listed sub-basis
// ---------------------------------------------------------------------------

/// A formal monomial `μ_left · x · μ_right^*` in the multivariable crossed
/// product. No normal form is imposed; elements are plain sums of monomials
/// and the algebra relations are exercised through [`pi_rep`].
#[derive(Clone, Debug)]
pub struct MultiBCMonomial {
    pub left: IntMatrix,
    pub mid: MultiQZElt,
    pub right: IntMatrix,
}

/// Finite formal sum of [`MultiBCMonomial`]s.
#[derive(Clone, Debug)]
pub struct MultiBCElement {
    terms: Vec<MultiBCMonomial>,
}

impl MultiBCElement {
    pub fn from_qz(x: MultiQZElt) -> Self {
        let n = x.nvars();
        MultiBCElement {
            terms: vec![MultiBCMonomial {
                left: IntMatrix::identity(n),
                mid: x,
                right: IntMatrix::identity(n),
            }],
        }
    }

    pub fn mu(alpha: IntMatrix) -> Self {
        let n = alpha.n();
        assert!(alpha.det() > &BigInt::zero());
        MultiBCElement {
            terms: vec![MultiBCMonomial {
                left: alpha,
                mid: MultiQZElt::one(n),
                right: IntMatrix::identity(n),
            }],
        }
    }

    pub fn mu_star(alpha: IntMatrix) -> Self {
        let n = alpha.n();
        assert!(alpha.det() > &BigInt::zero());
        MultiBCElement {
            terms: vec![MultiBCMonomial {
                left: IntMatrix::identity(n),
                mid: MultiQZElt::one(n),
                right: alpha,
            }],
        }
    }

    pub fn monomial(left: IntMatrix, mid: MultiQZElt, right: IntMatrix) -> Self {
        assert_eq!(left.n(), mid.nvars());
        assert_eq!(right.n(), mid.nvars());
        MultiBCElement {
            terms: vec![MultiBCMonomial { left, mid, right }],
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        MultiBCElement { terms }
    }

    pub fn terms(&self) -> &[MultiBCMonomial] {
        &self.terms
    }
}

/// Diagonal character of the group-ring element at basis matrix `β` with a
/// per-coordinate unit twist: the value is
/// `Σ_r c_r · e(Σ_j u_j r_j · rowsum_j(β))`.
fn diagonal_character(
    x: &MultiQZElt,
    units: &[u64],
    level: u64,
    beta: &IntMatrix,
    den: &BigInt,
) -> Result<CycInt, Error> {
    let rs = beta.row_sums();
    let mut out = CycInt::zero(level);
    for (r, c) in x.terms() {
        let mut exponent = BigRational::zero();
        for (j, rj) in r.iter().enumerate() {
            if level % rj.denominator() != 0 {
                return Err(Error::DenominatorMismatch {
                    denominator: rj.denominator(),
                    level,
                });
            }
            exponent +=
                BigRational::from(BigInt::from(units[j]) * &rs[j]) * root_to_rational(rj);
        }
        let root = rational_to_root(&exponent);
        let scaled = Ratio::from(den.clone()) * c;
        debug_assert!(scaled.is_integer());
        out = out.add(&root.as_cyc_int().embed_to(level).scale(&scaled.to_integer()));
    }
    Ok(out)
}

/// Represents an element on the listed basis matrices `S`: `μ_α ε_β = ε_{αβ}`
/// (flagged invalid when `αβ` is outside `S`), `μ_α^* ε_β = ε_{α⁻¹β}` when
/// `α⁻¹β` is integral and exactly `0` otherwise, and group-ring elements
/// acting diagonally through the transpose character with a per-coordinate
/// unit twist mod `level`.
///
/// Columns are `valid` when every monomial maps the basis vector either to
/// exact zero or to a listed basis vector.
pub fn pi_rep(
    u: &MultiBCElement,
    units: &[u64],
    level: u64,
    basis: &[IntMatrix],
) -> Result<TruncatedAction, Error> {
    assert!(!basis.is_empty(), "empty basis list");
    let n = basis[0].n();
    assert!(basis.iter().all(|b| b.n() == n));
    assert_eq!(units.len(), n, "one unit per coordinate required");
    for &uj in units {
        let a = uj % level;
        if gcd(a, level) != 1 {
            return Err(Error::NotAUnit {
                a: a as i64,
                m: level,
            });
        }
    }
    let mut index: BTreeMap<&IntMatrix, usize> = BTreeMap::new();
    for (i, b) in basis.iter().enumerate() {
        index.insert(b, i);
    }
    // Common denominator over all monomial coefficients.
    let mut den = BigInt::one();
    for mono in u.terms() {
        for c in mono.mid.terms().values() {
            den = den.lcm(c.denom());
        }
    }
    let mut matrix = CycMatrix::zero_with_den(basis.len(), level, den.clone());
    let mut valid = vec![true; basis.len()];
    for (cj, beta) in basis.iter().enumerate() {
        for mono in u.terms() {
            let Some(delta) = mono.right.solve_right(beta) else {
                continue; // μ_right^* annihilates ε_β exactly
            };
            let chi = diagonal_character(&mono.mid, units, level, &delta, &den)?;
            if chi.is_zero() {
                continue;
            }
            let target = mono.left.mul(&delta);
            match index.get(&target) {
                Some(&ti) => {
                    let cur = matrix.entry(ti, cj);
                    matrix.set_entry(ti, cj, cur.add(&chi));
                }
                None => valid[cj] = false,
            }
        }
    }
    matrix.canonicalize();
    Ok(TruncatedAction { matrix, valid })
}

// ---------------------------------------------------------------------------
// Hermite cosets and the type II₁ partition function
// ---------------------------------------------------------------------------

/// All canonical Hermite-form matrices of determinant `d`: upper triangular,
/// positive diagonal, and each off-diagonal entry in row `i` reduced into
/// `[0, h_ii)`. These are exactly the coset representatives produced by the
/// column-operation Hermite reduction, one per unimodular right-coset.
pub fn hnf_enumerate(n: usize, d: u64) -> Vec<IntMatrix> {
    assert!(n >= 1 && d >= 1);
    let mut out = Vec::new();
    let mut diag = vec![1u64; n];
    fill_diagonal(n, d, 0, &mut diag, &mut out);
    out
}

fn fill_diagonal(n: usize, remaining: u64, i: usize, diag: &mut Vec<u64>, out: &mut Vec<IntMatrix>) {
    if i == n - 1 {
        diag[i] = remaining;
        emit_offdiagonals(n, diag, out);
        return;
    }
    for di in divisors(remaining) {
        diag[i] = di;
        fill_diagonal(n, remaining / di, i + 1, diag, out);
    }
}

fn emit_offdiagonals(n: usize, diag: &[u64], out: &mut Vec<IntMatrix>) {
    // Free positions (i, j) with j > i, each ranging over [0, diag[i]).
    let positions: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut values = vec![0u64; positions.len()];
    loop {
        let mut rows = vec![vec![BigInt::zero(); n]; n];
        for i in 0..n {
            rows[i][i] = BigInt::from(diag[i]);
        }
        for (k, &(i, j)) in positions.iter().enumerate() {
            rows[i][j] = BigInt::from(values[k]);
        }
        out.push(IntMatrix::from_rows(rows));
        let mut k = 0;
        loop {
            if k == positions.len() {
                return;
            }
            values[k] += 1;
            if values[k] < diag[positions[k].0] {
                break;
            }
            values[k] = 0;
            k += 1;
        }
    }
}

/// Canonical Hermite form of a nonsingular matrix (the coset invariant used
/// to compare against [`hnf_enumerate`] representatives).
pub fn hnf(alpha: &IntMatrix) -> Result<IntMatrix, Error> {
    if alpha.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let (h, _) = zlin::hermite_normal_form(&alpha.rows);
    Ok(IntMatrix::from_rows(h))
}

/// Truncated coset partition sum with a rigorous bound on the dropped part.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PartitionII1 {
    /// `Σ_{d ≤ cap} (#cosets of determinant d) · d^{−β}`.
    pub value: f64,
    /// Upper bound on the dropped `d > cap` part.
    pub tail_bound: f64,
}

/// Sums `det^{-β}` over canonical determinant-`d` cosets up to `cap`. The
/// untruncated value is `∏_{k=0}^{n−1} ζ(β−k)`; requires `β > n`.
///
/// The tail uses the elementary bound `#cosets(d) ≤ d^{n−1}(1+ln d)^{n−1}`
/// and an exact integral of `t^{n−1−β}(1+ln t)^{n−1}`, valid as long as that
/// integrand is decreasing past the cap (asserted).
pub fn partition_ii1(n: usize, beta: f64, cap: u64) -> Result<PartitionII1, Error> {
    if !(beta > n as f64) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: n as f64,
        });
    }
    assert!(cap >= 3, "cap too small for the tail estimate");
    let s = beta - n as f64;
    let logd = 1.0 + (cap as f64).ln();
    assert!(
        (s + 1.0) * logd > (n - 1) as f64,
        "tail integrand must be decreasing past the cap"
    );
    let mut sum = NeumaierSum::new();
    for d in 1..=cap {
        let count = hnf_enumerate(n, d).len() as f64;
        sum.add(count * (d as f64).powf(-beta));
    }
    // ∫_cap^∞ t^{−s−1}(1+ln t)^p dt = cap^{−s}/s · Σ_j p!/(p−j)! · (1+ln cap)^{p−j}/s^j.
    let p = n - 1;
    let mut tail_series = 0.0;
    let mut falling = 1.0;
    for j in 0..=p {
        tail_series += falling * logd.powi((p - j) as i32) / s.powi(j as i32);
        falling *= (p - j) as f64;
    }
    let tail = (cap as f64).powf(-s) / s * tail_series;
    Ok(PartitionII1 {
        value: sum.total(),
        tail_bound: tail,
    })
}

/// Enclosure `[lo, hi]` of the product `∏_{k=0}^{n−1} ζ(β−k)` from truncated
/// sums with integral tail bounds; requires `β > n`.
pub fn zeta_product_interval(n: usize, beta: f64, cap: u64) -> Result<(f64, f64), Error> {
    if !(beta > n as f64) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: n as f64,
        });
    }
    let mut lo = 1.0;
    let mut hi = 1.0;
    for k in 0..n {
        let PartialZeta {
            value,
            tail_lo,
            tail_hi,
        } = crate::numerics::zeta_partial(beta - k as f64, cap)?;
        lo *= value + tail_lo;
        hi *= value + tail_hi;
    }
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// Finite groupoid functions
// ---------------------------------------------------------------------------

/// Finite-support function on pairs `(matrix, units-vector mod N)`, with
/// groupoid convolution and determinant-phase time evolution. The function
/// depends on the profinite coordinate only through its reduction mod `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidFn {
    n: usize,
    level: u64,
    terms: BTreeMap<(IntMatrix, Vec<u64>), Complex64>,
}

/// The matrix action on reduced profinite vectors: `(m·ρ) mod N`.
pub fn act_units(m: &IntMatrix, rho: &[u64], level: u64) -> Vec<u64> {
    let v: Vec<BigInt> = rho.iter().map(|&x| BigInt::from(x % level)).collect();
    m.times_vector(&v)
        .iter()
        .map(|x| {
            let r = x % BigInt::from(level);
            let r = if r < BigInt::zero() {
                r + BigInt::from(level)
            } else {
                r
            };
            r.to_u64().unwrap()
        })
        .collect()
}

impl GroupoidFn {
    pub fn new(n: usize, level: u64) -> Self {
        assert!(n >= 1 && level >= 1);
        GroupoidFn {
            n,
            level,
            terms: BTreeMap::new(),
        }
    }

    /// Supported on the identity matrix only, with the given value at every
    /// reduced profinite vector (the constant function of the unit space).
    pub fn constant_at_identity(n: usize, level: u64, value: Complex64) -> Self {
        let mut f = GroupoidFn::new(n, level);
        let id = IntMatrix::identity(n);
        let mut rho = vec![0u64; n];
        loop {
            f.set(id.clone(), rho.clone(), value);
            let mut i = 0;
            loop {
                if i == n {
                    return f;
                }
                rho[i] += 1;
                if rho[i] < level {
                    break;
                }
                rho[i] = 0;
                i += 1;
            }
        }
    }

    pub fn set(&mut self, gamma: IntMatrix, rho: Vec<u64>, v: Complex64) {
        assert_eq!(gamma.n(), self.n);
        assert_eq!(rho.len(), self.n);
        assert!(rho.iter().all(|&x| x < self.level));
        assert!(gamma.det() > &BigInt::zero());
        if v == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(gamma, rho));
        } else {
            self.terms.insert((gamma, rho), v);
        }
    }

    pub fn eval(&self, gamma: &IntMatrix, rho: &[u64]) -> Complex64 {
        self.terms
            .get(&(gamma.clone(), rho.to_vec()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<(IntMatrix, Vec<u64>), Complex64> {
        &self.terms
    }

    /// Groupoid convolution: `(f1 ⋆ f2)(γβ, ρ) += f1(γ, β(ρ)) · f2(β, ρ)`.
    pub fn convolve(&self, other: &GroupoidFn) -> GroupoidFn {
        assert_eq!(self.n, other.n);
        assert_eq!(self.level, other.level);
        let mut out = GroupoidFn::new(self.n, self.level);
        for ((beta, rho), v2) in &other.terms {
            let moved = act_units(beta, rho, self.level);
            for ((gamma, rho1), v1) in &self.terms {
                if *rho1 == moved {
                    let key = (gamma.mul(beta), rho.clone());
                    let cur = out
                        .terms
                        .get(&key)
                        .copied()
                        .unwrap_or(Complex64::new(0.0, 0.0));
                    out.terms.insert(key, cur + v1 * v2);
                }
            }
        }
        out.terms.retain(|_, v| *v != Complex64::new(0.0, 0.0));
        out
    }

    /// Determinant-phase time evolution `f(γ, ρ) ↦ det(γ)^{it} f(γ, ρ)`;
    /// multiplicative under convolution because determinants multiply.
    pub fn time_evolve(&self, t: f64) -> GroupoidFn {
        let mut out = self.clone();
        for ((gamma, _), v) in out.terms.iter_mut() {
            let phase =
                Complex64::new(0.0, t * gamma.det().to_f64().unwrap().ln()).exp();
            *v *= phase;
        }
        out
    }
}

/// Low-temperature Gibbs value: the coset sum
/// `Σ_{det m ≤ cap} f(1, m(ρ)) det(m)^{−β}` normalized by the matching
/// truncation of the partition sum. Requires `β > n`.
pub fn groupoid_gibbs(
    f: &GroupoidFn,
    rho: &[u64],
    beta: f64,
    cap: u64,
) -> Result<Complex64, Error> {
    let n = f.n();
    assert_eq!(rho.len(), n);
    if !(beta > n as f64) {
        return Err(Error::BetaOutOfRange {
            beta,
            min: n as f64,
        });
    }
    let id = IntMatrix::identity(n);
    let mut num_re = NeumaierSum::new();
    let mut num_im = NeumaierSum::new();
    let mut den = NeumaierSum::new();
    for d in 1..=cap {
        let w = (d as f64).powf(-beta);
        for m in hnf_enumerate(n, d) {
            let v = f.eval(&id, &act_units(&m, rho, f.level()));
            num_re.add(v.re * w);
            num_im.add(v.im * w);
            den.add(w);
        }
    }
    let z = den.total();
    Ok(Complex64::new(num_re.total() / z, num_im.total() / z))
}
