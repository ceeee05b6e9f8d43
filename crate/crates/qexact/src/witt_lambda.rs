//! Truncated big Witt vectors with exact ghost-coordinate arithmetic, the
//! Adams–Frobenius operations, a Frobenius-lift congruence checker for
//! cyclic group rings, and the profinite relabelling action on finite-order
//! exponential sums.
//!
//! A Witt vector of truncation `N` stores rational components `u_1..u_N`.
//! Its ghost coordinates are `psi_n = sum_{d | n} d * u_d^{n/d}`.  Over a
//! torsion-free coefficient ring the ghost map is injective, so ring
//! operations are transported through it: evaluate the ghost coordinates,
//! operate componentwise, then invert the triangular recursion.  That
//! transport is exactly why components live in `Q` here — over rings with
//! torsion the ghost map loses information and one would need the universal
//! Witt polynomials instead (deliberately out of scope).  The classical
//! integrality phenomenon — sums and products of integral vectors are
//! integral even though intermediate ghost arithmetic divides by `n` — is
//! exercised by the tests rather than assumed.
//!
//! The group-ring half of the module checks the lambda-ring lift congruence
//! `s_p(x) ≡ x^p (mod p)` in `Z[t]/(t^k − 1)`, where `s_p` substitutes
//! `t ↦ t^p`; the checker returns the exact difference and the divided
//! witness.  Finally, [`zhat_act`] implements the level-`b` relabelling
//! `e(r) ↦ e(a·r mod 1)` on exponential sums whose denominators divide `b`,
//! which extends the power maps [`qz_sigma`](crate::bc_core::qz_sigma) to
//! arbitrary residues `a mod b` and is invertible whenever `gcd(a, b) = 1`.

use num::{BigInt, BigRational, One, Zero};

use crate::arith::{divisors, is_prime};
use crate::bc_core::QZElt;
use crate::cyclotomic::RootOfUnity;
use crate::error::Error;
use crate::poly::IntPoly;

/// `base^exp` for small exponents by repeated multiplication.
fn rat_pow(base: &BigRational, exp: u32) -> BigRational {
    let mut out = BigRational::one();
    for _ in 0..exp {
        out *= base;
    }
    out
}

fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// A truncated big Witt vector: exact rational components `u_1..u_N`.
///
/// The truncation `N` fixes the component index set `{1, .., N}`.  Ring
/// operations are provided by the free functions [`witt_add`] and
/// [`witt_mul`]; [`ghost`] and [`unghost`] convert to and from ghost
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector {
    components: Vec<BigRational>,
}

impl WittVector {
    /// Wraps the component vector `u_1..u_N` (truncation = length ≥ 1).
    pub fn new(components: Vec<BigRational>) -> Self {
        assert!(!components.is_empty(), "truncation must be at least 1");
        WittVector { components }
    }

    /// Integer-component convenience constructor.
    pub fn from_i64(components: &[i64]) -> Self {
        WittVector::new(components.iter().map(|&c| rat_int(c)).collect())
    }

    /// The additive unit at truncation `n`: all components zero.
    pub fn zero(n: usize) -> Self {
        WittVector::new(vec![BigRational::zero(); n])
    }

    /// The multiplicative unit at truncation `n`: `[1, 0, .., 0]`, the
    /// unique vector whose ghost coordinates are identically 1.
    pub fn one(n: usize) -> Self {
        let mut components = vec![BigRational::zero(); n];
        components[0] = BigRational::one();
        WittVector::new(components)
    }

    /// Number of stored components.
    pub fn truncation(&self) -> usize {
        self.components.len()
    }

    /// Components `u_1..u_N`; slice index `i` holds `u_{i+1}`.
    pub fn components(&self) -> &[BigRational] {
        &self.components
    }

    /// Whether every component is an integer.
    pub fn is_integral(&self) -> bool {
        self.components.iter().all(|c| c.is_integer())
    }

    /// The components as integers, or the 1-based index of the first
    /// non-integral component.
    pub fn integral_components(&self) -> Result<Vec<BigInt>, Error> {
        let mut out = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.iter().enumerate() {
            if !c.is_integer() {
                return Err(Error::NonIntegral { index: i + 1 });
            }
            out.push(c.to_integer());
        }
        Ok(out)
    }
}

/// The ghost coordinates `psi_n = sum_{d | n} d * u_d^{n/d}` for
/// `n = 1..=N`, evaluated exactly.
pub fn ghost(w: &WittVector) -> Vec<BigRational> {
    let len = w.truncation();
    let mut psi = Vec::with_capacity(len);
    for n in 1..=len {
        let mut acc = BigRational::zero();
        for d in divisors(n as u64) {
            let d = d as usize;
            acc += rat_pow(&w.components[d - 1], (n / d) as u32) * rat_int(d as i64);
        }
        psi.push(acc);
    }
    psi
}

/// Inverts [`ghost`]: the triangular recursion
/// `u_n = (psi_n − sum_{d | n, d < n} d * u_d^{n/d}) / n`, exact over the
/// rationals.  Use [`WittVector::integral_components`] afterwards when an
/// integral result is required.
pub fn unghost(psi: &[BigRational]) -> WittVector {
    assert!(!psi.is_empty(), "truncation must be at least 1");
    let mut components: Vec<BigRational> = Vec::with_capacity(psi.len());
    for n in 1..=psi.len() {
        let mut acc = psi[n - 1].clone();
        for d in divisors(n as u64) {
            let d = d as usize;
            if d < n {
                acc -= rat_pow(&components[d - 1], (n / d) as u32) * rat_int(d as i64);
            }
        }
        components.push(acc / rat_int(n as i64));
    }
    WittVector::new(components)
}

fn ghost_zip(
    w1: &WittVector,
    w2: &WittVector,
    op: impl Fn(&BigRational, &BigRational) -> BigRational,
) -> Result<WittVector, Error> {
    if w1.truncation() != w2.truncation() {
        return Err(Error::TruncationMismatch {
            left: w1.truncation(),
            right: w2.truncation(),
        });
    }
    let psi1 = ghost(w1);
    let psi2 = ghost(w2);
    let combined: Vec<BigRational> = psi1.iter().zip(&psi2).map(|(a, b)| op(a, b)).collect();
    Ok(unghost(&combined))
}

/// Witt-vector sum: componentwise addition in ghost coordinates.
pub fn witt_add(w1: &WittVector, w2: &WittVector) -> Result<WittVector, Error> {
    ghost_zip(w1, w2, |a, b| a + b)
}

/// Witt-vector product: componentwise multiplication in ghost coordinates.
pub fn witt_mul(w1: &WittVector, w2: &WittVector) -> Result<WittVector, Error> {
    ghost_zip(w1, w2, |a, b| a * b)
}

/// The `n`-th Adams–Frobenius operation: reindex ghost coordinates by
/// `psi'_m = psi_{n·m}` and return the induced vector at truncation
/// `floor(N / n)` (so `n` need not divide `N`, but `n ≤ N` is required for
/// the result to be non-empty).  `adams_frobenius(w, 1)` is the identity,
/// and `F_n ∘ F_m = F_{n·m}` — the truncations agree because
/// `floor(floor(N/m)/n) = floor(N/(n·m))`.
pub fn adams_frobenius(w: &WittVector, n: usize) -> WittVector {
    assert!(n >= 1, "operation index must be at least 1");
    let trunc = w.truncation() / n;
    assert!(trunc >= 1, "operation index exceeds the truncation");
    let psi = ghost(w);
    let reindexed: Vec<BigRational> = (1..=trunc).map(|m| psi[n * m - 1].clone()).collect();
    unghost(&reindexed)
}

/// The cyclic-group ring `Z[t]/(t^k − 1)` packaged with a prime `p` for the
/// Frobenius-lift congruence check.  Elements are dense coefficient vectors
/// of length `k`; index `i` holds the coefficient of `t^i`.
#[derive(Clone, Debug)]
pub struct GroupRingModP {
    modulus: usize,
    prime: u64,
}

impl GroupRingModP {
    /// A ring with cyclic order `k ≥ 1` (so `t^k = 1`) and a prime `p`.
    pub fn new(modulus: usize, prime: u64) -> Self {
        assert!(modulus >= 1, "cyclic order must be at least 1");
        assert!(is_prime(prime), "the congruence modulus must be prime");
        GroupRingModP { modulus, prime }
    }

    /// Cyclic order `k` of the generator.
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// The prime of the congruence.
    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Reduces an integer polynomial into the ring by wrapping exponents
    /// modulo `k`.
    pub fn reduce(&self, poly: &IntPoly) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.modulus];
        for (i, c) in poly.coeffs().iter().enumerate() {
            out[i % self.modulus] += c;
        }
        out
    }

    /// The generator `t` as an element.
    pub fn generator(&self) -> Vec<BigInt> {
        self.reduce(&IntPoly::x())
    }

    /// Product by cyclic convolution.
    pub fn mul(&self, x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.modulus, "element length must match the order");
        assert_eq!(y.len(), self.modulus, "element length must match the order");
        let mut out = vec![BigInt::zero(); self.modulus];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                out[(i + j) % self.modulus] += a * b;
            }
        }
        out
    }

    /// `x^e` by repeated multiplication (exponents in play are tiny).
    pub fn pow(&self, x: &[BigInt], e: u32) -> Vec<BigInt> {
        let mut out = self.reduce(&IntPoly::one());
        for _ in 0..e {
            out = self.mul(&out, x);
        }
        out
    }

    /// The substitution endomorphism `t ↦ t^n`, i.e. `x(t) ↦ x(t^n)` with
    /// exponents wrapped modulo `k`.
    pub fn substitute_power(&self, x: &[BigInt], n: u64) -> Vec<BigInt> {
        assert_eq!(x.len(), self.modulus, "element length must match the order");
        let mut out = vec![BigInt::zero(); self.modulus];
        for (i, c) in x.iter().enumerate() {
            out[((i as u64 * n) % self.modulus as u64) as usize] += c;
        }
        out
    }
}

/// Outcome of the Frobenius-lift congruence test `s_p(x) ≡ x^p (mod p)`.
#[derive(Clone, Debug)]
pub struct FrobeniusWitness {
    /// Whether every coefficient of the difference is divisible by `p`.
    pub holds: bool,
    /// `s_p(x) − x^p` as a coefficient vector.
    pub difference: Vec<BigInt>,
    /// The divided witness: `p · quotient = s_p(x) − x^p` when [`holds`].
    ///
    /// [`holds`]: FrobeniusWitness::holds
    pub quotient: Option<Vec<BigInt>>,
}

/// Checks the lambda-ring lift congruence for one element: the substitution
/// endomorphism `s_p : t ↦ t^p` must agree with the `p`-th power map modulo
/// `p`.  Returns the exact difference and, when divisible, the quotient
/// certifying `s_p(x) − x^p ∈ p·Z[t]/(t^k − 1)`.
pub fn frobenius_lift_check(ring: &GroupRingModP, x: &[BigInt]) -> FrobeniusWitness {
    let p = ring.prime();
    let substituted = ring.substitute_power(x, p);
    let powered = ring.pow(x, p as u32);
    let difference: Vec<BigInt> = substituted.iter().zip(&powered).map(|(a, b)| a - b).collect();
    let p_big = BigInt::from(p);
    let holds = difference.iter().all(|c| (c % &p_big).is_zero());
    let quotient = if holds {
        Some(difference.iter().map(|c| c / &p_big).collect())
    } else {
        None
    };
    FrobeniusWitness {
        holds,
        difference,
        quotient,
    }
}

/// The level-`b` relabelling action of a residue `a mod b` on exponential
/// sums: each basis term `e(r)` with `r = num/den` becomes `e(a·r mod 1)`,
/// provided every support denominator divides `b`.
///
/// For `a = n ≥ 1` this agrees with the power map
/// [`qz_sigma`](crate::bc_core::qz_sigma); for `gcd(a, b) = 1` it is an
/// automorphism, inverted by the modular inverse of `a`; and it composes
/// multiplicatively, `a₂ ∘ a₁ = a₁·a₂ mod b`.
pub fn zhat_act(x: &QZElt, a: u64, b: u64) -> Result<QZElt, Error> {
    assert!(b >= 1, "level must be at least 1");
    let a = a % b;
    let mut terms = Vec::new();
    for (root, coeff) in x.terms() {
        let den = root.denominator();
        if b % den != 0 {
            return Err(Error::DenominatorMismatch {
                denominator: den,
                level: b,
            });
        }
        let num = (a as u128 * root.numerator() as u128 % den as u128) as u64;
        terms.push((RootOfUnity::new(num, den), coeff.clone()));
    }
    Ok(QZElt::from_terms(terms))
}
