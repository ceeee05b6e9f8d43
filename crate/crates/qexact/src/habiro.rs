//! Finite-level model of the cyclotomic completion of `Z[q]`.
//!
//! The completion is the inverse limit of the quotients `Z[q]/((q)_N)` where
//! `(q)_N = (1-q)(1-q^2)···(1-q^N)`. This module works with a single level at
//! a time: a [`HabiroElt`] is a residue class modulo `(q)_N`, stored as its
//! canonical representative of degree `< N(N+1)/2`. Operations that only make
//! sense after passing to a deeper or shallower level (projection, mixed-level
//! arithmetic) project explicitly, so every answer names the level it lives at.
//!
//! The substitution endomorphisms `sigma_n : f(q) -> f(q^n)` act on each
//! quotient; [`HabiroElt::eta_n`] inverts them where possible by exact integer
//! linear algebra, certifying non-membership in the image otherwise. Roots of
//! unity of order up to the level can be substituted for `q`
//! ([`HabiroElt::ev`]), and near a root of unity an element has a finite jet
//! in powers of `q - zeta` ([`HabiroElt::taylor`]) whose length is capped by
//! how many times `q - zeta` divides `(q)_N`.
//!
//! [`FracHabiroElt`] extends the picture by a formal positive rational
//! substitution exponent: the pair `(f, a/b)` stands for `f(q^{a/b})`, the
//! positive rationals act by multiplying the exponent, and two pairs are
//! compared by clearing denominators back into integer substitutions.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num::bigint::BigInt;
use num::rational::Ratio;
use num::traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::binomial;
use crate::cyclotomic::{eval_poly, CycInt, RootOfUnity};
use crate::error::Error;
use crate::poly::IntPoly;
use crate::zlin;

/// Returns `(q)_n = (1-q)(1-q^2)···(1-q^n)` (the empty product for `n = 0`).
///
/// Degree `n(n+1)/2`, leading coefficient `(-1)^n`. Values are cached since
/// every reduction at level `n` divides by the same polynomial.
pub fn pochhammer(n: u32) -> Arc<IntPoly> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<IntPoly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return Arc::clone(p);
    }
    let mut acc = IntPoly::one();
    for k in 1..=n {
        // 1 - q^k
        let factor = IntPoly::one().sub(&IntPoly::monomial(k as usize, BigInt::one()));
        acc = acc.mul(&factor);
    }
    let arc = Arc::new(acc);
    cache
        .lock()
        .unwrap()
        .entry(n)
        .or_insert_with(|| Arc::clone(&arc));
    arc
}

/// A residue class in `Z[q]/((q)_N)`, stored by its canonical representative
/// of degree `< N(N+1)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HabiroElt {
    level: u32,
    rep: IntPoly,
}

impl HabiroElt {
    /// Reduces an integer polynomial modulo `(q)_level`. Level must be ≥ 1.
    pub fn reduce(p: &IntPoly, level: u32) -> Self {
        assert!(level >= 1, "level must be at least 1");
        let modulus = pochhammer(level);
        let (_, rem) = p
            .divmod(&modulus)
            .expect("(q)_N has unit leading coefficient");
        HabiroElt { level, rep: rem }
    }

    /// Parses a polynomial in the variable `q` and reduces it at `level`.
    pub fn parse(text: &str, level: u32) -> Result<Self, Error> {
        let p = IntPoly::parse(text, "q")?;
        Ok(HabiroElt::reduce(&p, level))
    }

    pub fn zero(level: u32) -> Self {
        HabiroElt::reduce(&IntPoly::zero(), level)
    }

    pub fn one(level: u32) -> Self {
        HabiroElt::reduce(&IntPoly::one(), level)
    }

    /// The class of the variable `q` itself.
    pub fn q(level: u32) -> Self {
        HabiroElt::reduce(&IntPoly::x(), level)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    /// Canonical representative (degree `< level·(level+1)/2`).
    pub fn rep(&self) -> &IntPoly {
        &self.rep
    }

    pub fn is_zero(&self) -> bool {
        self.rep.is_zero()
    }

    /// Projects to a shallower level `k ≤ level` (further reduction).
    pub fn project(&self, k: u32) -> Self {
        assert!(
            1 <= k && k <= self.level,
            "projection target must satisfy 1 <= k <= level"
        );
        HabiroElt::reduce(&self.rep, k)
    }

    fn common_level(&self, other: &HabiroElt) -> u32 {
        self.level.min(other.level)
    }

    /// Sum at the finer of the two levels that both elements live at.
    pub fn add(&self, other: &HabiroElt) -> Self {
        let k = self.common_level(other);
        HabiroElt::reduce(&self.rep.add(&other.rep), k)
    }

    pub fn sub(&self, other: &HabiroElt) -> Self {
        let k = self.common_level(other);
        HabiroElt::reduce(&self.rep.sub(&other.rep), k)
    }

    pub fn neg(&self) -> Self {
        HabiroElt {
            level: self.level,
            rep: self.rep.neg(),
        }
    }

    pub fn mul(&self, other: &HabiroElt) -> Self {
        let k = self.common_level(other);
        HabiroElt::reduce(&self.rep.mul(&other.rep), k)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        HabiroElt {
            level: self.level,
            rep: self.rep.scale(c),
        }
    }

    /// The substitution endomorphism `f(q) -> f(q^n)`, `n ≥ 1`, at the same
    /// level. Well defined on residue classes because `(q)_N` divides
    /// `(q)_N(q^n)` factor by factor: `(1-q^k) | (1-q^{nk})`.
    pub fn sigma_n(&self, n: u32) -> Self {
        assert!(n >= 1, "substitution exponent must be at least 1");
        HabiroElt::reduce(&self.rep.substitute_power(n), self.level)
    }

    /// Partial inverse of [`sigma_n`](Self::sigma_n) at level `k ≤ level`:
    /// finds `h` with `sigma_n(h) = project(f, k)`, or certifies that the
    /// projection is not in the image of `sigma_n` at level `k`.
    ///
    /// The preimage is produced by an exact integer solve against the matrix
    /// of `sigma_n` on the monomial basis; a deterministic particular solution
    /// is returned (free coordinates pinned to zero in the echelon basis).
    /// When `sigma_n` is not injective at level `k` the preimage class is a
    /// coset of the kernel; [`eta_n_with_uniqueness`](Self::eta_n_with_uniqueness)
    /// reports whether the answer was forced.
    pub fn eta_n(&self, n: u32, k: u32) -> Result<HabiroElt, Error> {
        self.eta_n_with_uniqueness(n, k).map(|(h, _)| h)
    }

    /// Like [`eta_n`](Self::eta_n), also reporting whether the preimage is
    /// unique at level `k`.
    pub fn eta_n_with_uniqueness(&self, n: u32, k: u32) -> Result<(HabiroElt, bool), Error> {
        assert!(n >= 1, "substitution exponent must be at least 1");
        assert!(
            1 <= k && k <= self.level,
            "target level must satisfy 1 <= k <= level"
        );
        let target = self.project(k);
        let dim = (k as usize) * (k as usize + 1) / 2;
        // Column j is sigma_n(q^j) reduced at level k.
        let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(dim);
        for j in 0..dim {
            let image = HabiroElt::reduce(
                &IntPoly::monomial(j, BigInt::one()).substitute_power(n),
                k,
            );
            let mut col = vec![BigInt::zero(); dim];
            for (e, c) in image.rep.coeffs().iter().enumerate() {
                col[e] = c.clone();
            }
            cols.push(col);
        }
        let matrix: zlin::Mat = (0..dim)
            .map(|r| (0..dim).map(|c| cols[c][r].clone()).collect())
            .collect();
        let mut rhs = vec![BigInt::zero(); dim];
        for (e, c) in target.rep.coeffs().iter().enumerate() {
            rhs[e] = c.clone();
        }
        match zlin::solve_integer(&matrix, &rhs) {
            Some((x, unique)) => {
                let h = HabiroElt::reduce(&IntPoly::new(x), k);
                Ok((h, unique))
            }
            None => Err(Error::NotInRange {
                n: n as u64,
                level: k,
            }),
        }
    }

    /// Substitutes a root of unity for `q`. Defined whenever the order of the
    /// root is at most the level, since `(q)_N` vanishes at every root of
    /// unity of order ≤ N; the result lives in the cyclotomic integers of that
    /// order.
    pub fn ev(&self, zeta: RootOfUnity) -> Result<CycInt, Error> {
        let order = zeta.order();
        if order > self.level as u64 {
            return Err(Error::OrderExceedsLevel {
                order,
                level: self.level,
            });
        }
        Ok(eval_poly(&self.rep, zeta))
    }

    /// Jet of the element at `q = zeta`: coefficients `t_0, ..., t_{depth-1}`
    /// of the expansion `f = sum_k t_k (q - zeta)^k`, each a cyclotomic
    /// integer of the order of `zeta`.
    ///
    /// Well defined on residue classes as long as `depth · order ≤ level`:
    /// `q - zeta` divides `(q)_N` exactly `floor(N / order)` times, so jets of
    /// that depth ignore the choice of representative. `t_0` is [`ev`](Self::ev).
    pub fn taylor(&self, zeta: RootOfUnity, depth: u32) -> Result<Vec<CycInt>, Error> {
        check_depth(zeta.order(), depth, self.level)?;
        Ok(expand_at(&self.rep, zeta, depth))
    }

    /// Jet of `sigma_n(f)` at `q = zeta`, computed from the unreduced
    /// substituted representative `rep(q^n)`.
    ///
    /// Agrees with `self.sigma_n(n).taylor(zeta, depth)` — the two
    /// representatives differ by a multiple of `(q)_N`, which is invisible to
    /// jets of admissible depth — but skips the polynomial reduction, which is
    /// what makes per-`n` sweeps over many substitutions affordable. Note the
    /// base point: this is the jet of the substituted element at `zeta`, not
    /// the jet of `f` at `zeta^n`; the two differ beyond order zero.
    pub fn taylor_of_sigma(
        &self,
        zeta: RootOfUnity,
        n: u32,
        depth: u32,
    ) -> Result<Vec<CycInt>, Error> {
        assert!(n >= 1, "substitution exponent must be at least 1");
        check_depth(zeta.order(), depth, self.level)?;
        Ok(expand_at(&self.rep.substitute_power(n), zeta, depth))
    }
}

fn check_depth(order: u64, depth: u32, level: u32) -> Result<(), Error> {
    if order * depth as u64 > level as u64 {
        return Err(Error::OrderTimesDepthExceedsLevel {
            order,
            depth,
            level,
        });
    }
    Ok(())
}

/// Expands an integer polynomial at `q = zeta` up to order `depth`:
/// coefficient `k` is `sum_j a_j · C(j, k) · zeta^{j-k}`.
fn expand_at(p: &IntPoly, zeta: RootOfUnity, depth: u32) -> Vec<CycInt> {
    let mut out = Vec::with_capacity(depth as usize);
    for k in 0..depth as usize {
        let coeffs: Vec<BigInt> = p
            .coeffs()
            .iter()
            .enumerate()
            .skip(k)
            .map(|(j, a)| a * binomial(j as u64, k as u64))
            .collect();
        let shifted = IntPoly::new(coeffs);
        out.push(eval_poly(&shifted, zeta));
    }
    out
}

impl fmt::Display for HabiroElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (level {})", self.rep.display_with("q"), self.level)
    }
}

#[derive(Serialize, Deserialize)]
struct HabiroEltDto {
    level: u32,
    coeffs: Vec<String>,
}

impl Serialize for HabiroElt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        HabiroEltDto {
            level: self.level,
            coeffs: self.rep.to_dec_strings(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HabiroElt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let dto = HabiroEltDto::deserialize(d)?;
        if dto.level < 1 {
            return Err(D::Error::custom("level must be at least 1"));
        }
        let p = IntPoly::from_dec_strings(&dto.coeffs).map_err(D::Error::custom)?;
        Ok(HabiroElt::reduce(&p, dto.level))
    }
}

/// A positive rational number, used as a formal substitution exponent.
pub type PosRational = Ratio<u64>;

/// A pair `(f, a/b)` standing for the formal substitution `f(q^{a/b})`.
///
/// The positive rationals act by multiplying the exponent
/// ([`frac_act`](Self::frac_act)); since integer exponents are genuine
/// substitutions, `(sigma_k(f), r)` and `(f, k·r)` denote the same element,
/// and [`frac_eq`](Self::frac_eq) compares two pairs by clearing denominators
/// into that integer form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FracHabiroElt {
    base: HabiroElt,
    scale: PosRational,
}

impl FracHabiroElt {
    /// Wraps `base` with exponent `num/den` (both ≥ 1).
    pub fn new(base: HabiroElt, num: u64, den: u64) -> Self {
        assert!(num >= 1 && den >= 1, "exponent must be a positive rational");
        FracHabiroElt {
            base,
            scale: PosRational::new(num, den),
        }
    }

    pub fn base(&self) -> &HabiroElt {
        &self.base
    }

    /// The exponent `a/b` in lowest terms.
    pub fn scale(&self) -> PosRational {
        self.scale
    }

    /// Acts by a positive rational: `(f, s) -> (f, r·s)`, i.e. composes the
    /// formal substitutions `q -> q^s` and `q -> q^r`.
    pub fn frac_act(&self, r: PosRational) -> Self {
        assert!(*r.numer() >= 1, "action exponent must be positive");
        FracHabiroElt {
            base: self.base.clone(),
            scale: self.scale * r,
        }
    }

    /// Tests whether two pairs denote the same formal substitution, comparing
    /// at level `k`: `(f, a/b) = (g, c/d)` iff `sigma_{a·d}(f) = sigma_{c·b}(g)`
    /// there (both sides are the substitution by the common exponent
    /// `1/(b·d)` applied to equal integer-exponent substitutions).
    pub fn frac_eq(&self, other: &FracHabiroElt, k: u32) -> bool {
        let (a, b) = (*self.scale.numer(), *self.scale.denom());
        let (c, d) = (*other.scale.numer(), *other.scale.denom());
        let left_exp = a.checked_mul(d).expect("exponent overflow");
        let right_exp = c.checked_mul(b).expect("exponent overflow");
        let left = self
            .base
            .project(k.min(self.base.level))
            .sigma_n(u32::try_from(left_exp).expect("exponent too large"));
        let right = other
            .base
            .project(k.min(other.base.level))
            .sigma_n(u32::try_from(right_exp).expect("exponent too large"));
        let kk = left.common_level(&right).min(k);
        left.project(kk) == right.project(kk)
    }
}

impl fmt::Display for FracHabiroElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}) at exponent {}/{}",
            self.base,
            self.scale.numer(),
            self.scale.denom()
        )
    }
}
