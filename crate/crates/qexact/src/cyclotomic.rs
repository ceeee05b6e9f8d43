//! Exact arithmetic with roots of unity and cyclotomic integers `Z[ζ_m]`.
//!
//! `Z[ζ_m]` is represented as `Z[x]/(Φ_m)` with coefficient vectors of length
//! exactly `φ(m)`, so representations are unique, torsion-free, and `==` can
//! be made mathematical equality across different declared orders (operands
//! are embedded into `Z[ζ_lcm]` via `x ↦ x^{lcm/d}` before comparison).
//!
//! Abstract roots of unity are tracked as reduced fractions `a/b ∈ Q/Z`
//! (the root `e(a/b) = e^{2πi a/b}`); all root exponentiation happens on the
//! fraction, never on complex values, so exactness is preserved end to end.
//! The only bridge to floating point is [`complex_embed`], used by the
//! statistical-mechanics layer at the last step of a computation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use num::bigint::BigInt;
use num::complex::Complex64;
use num::traits::{One, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{divisors, euler_phi, gcd, lcm};
use crate::error::Error;
use crate::poly::IntPoly;
use crate::Result;

/// An abstract root of unity `e(a/b) = e^{2πi a/b}`, stored as the reduced
/// fraction `a/b ∈ Q/Z` with `0 ≤ a < b` and `gcd(a, b) = 1`.
///
/// The identity root is `0/1`; the order of `e(a/b)` is `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    num: u64,
    den: u64,
}

impl RootOfUnity {
    /// Builds `e(a/b)`, reducing the fraction into canonical form modulo 1.
    pub fn new(a: u64, b: u64) -> Self {
        assert!(b >= 1, "root of unity needs a positive denominator");
        let a = a % b;
        let g = gcd(a, b);
        if a == 0 {
            RootOfUnity { num: 0, den: 1 }
        } else {
            RootOfUnity {
                num: a / g,
                den: b / g,
            }
        }
    }

    /// The identity root `e(0) = 1`.
    pub fn one() -> Self {
        RootOfUnity { num: 0, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    /// Multiplicative order, i.e. the reduced denominator.
    pub fn order(&self) -> u64 {
        self.den
    }

    /// `ζ^k` by exact exponent arithmetic on the label.
    pub fn pow(&self, k: u64) -> Self {
        // Reduce k mod den first so the u128 product below cannot overflow.
        let k = k % self.den;
        RootOfUnity::new(((self.num as u128 * k as u128) % self.den as u128) as u64, self.den)
    }

    /// Product of roots: `e(r)·e(s) = e(r + s mod 1)`.
    pub fn mul(&self, other: &RootOfUnity) -> Self {
        let den = lcm(self.den, other.den);
        let a = (self.num as u128 * (den / self.den) as u128
            + other.num as u128 * (den / other.den) as u128)
            % den as u128;
        RootOfUnity::new(a as u64, den)
    }

    /// Inverse root `e(-r)`.
    pub fn inverse(&self) -> Self {
        RootOfUnity::new(self.den - self.num, self.den)
    }

    /// The canonical primitive root of unity of order `m`, i.e. `e(1/m)`.
    pub fn primitive(m: u64) -> Self {
        RootOfUnity::new(1 % m.max(1), m)
    }

    /// Exact image as a cyclotomic integer of its own order.
    pub fn as_cyc_int(&self) -> CycInt {
        CycInt::from_poly(self.den, &IntPoly::monomial(self.num as usize, BigInt::one()))
    }
}

impl PartialOrd for RootOfUnity {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RootOfUnity {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Order by value of the fraction in [0, 1); reduced form is unique so
        // this is a total order compatible with equality.
        let lhs = self.num as u128 * other.den as u128;
        let rhs = other.num as u128 * self.den as u128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for RootOfUnity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for RootOfUnity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (a, b) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let a: u64 = a
            .parse()
            .map_err(|_| Error::Parse(format!("bad root-of-unity numerator in {s:?}")))?;
        let b: u64 = b
            .parse()
            .map_err(|_| Error::Parse(format!("bad root-of-unity denominator in {s:?}")))?;
        if b == 0 {
            return Err(Error::Parse("root-of-unity denominator must be positive".into()));
        }
        Ok(RootOfUnity::new(a, b))
    }
}

impl Serialize for RootOfUnity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for RootOfUnity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(|e: Error| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Cyclotomic polynomials and the reduction tables behind Z[ζ_m]
// ---------------------------------------------------------------------------

fn phi_cache() -> &'static Mutex<HashMap<u64, Arc<IntPoly>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<IntPoly>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cyclotomic_poly_arc(m: u64) -> Arc<IntPoly> {
    assert!(m >= 1, "cyclotomic polynomial index must be positive");
    if let Some(p) = phi_cache().lock().unwrap().get(&m) {
        return Arc::clone(p);
    }
    // Φ_m = (x^m − 1) / ∏_{d|m, d<m} Φ_d, an exact division over Z.
    let mut num = IntPoly::monomial(m as usize, BigInt::one()).sub(&IntPoly::one());
    for d in divisors(m) {
        if d < m {
            num = num.div_exact(&cyclotomic_poly_arc(d));
        }
    }
    let arc = Arc::new(num);
    phi_cache()
        .lock()
        .unwrap()
        .entry(m)
        .or_insert_with(|| Arc::clone(&arc));
    arc
}

/// The `m`-th cyclotomic polynomial `Φ_m`, monic of degree `φ(m)`.
pub fn cyclotomic_poly(m: u64) -> IntPoly {
    cyclotomic_poly_arc(m).as_ref().clone()
}

/// Reduction table for order `m`: entry `e` holds the coefficient vector of
/// `x^e mod Φ_m` (length `φ(m)`), for `0 ≤ e < m`.
///
/// Since `Φ_m | x^m − 1`, every exponent reduces mod `m` first; with the table
/// cached per order, evaluation, Galois action, order-embedding, and products
/// all become sparse scatter-adds instead of repeated long division.
fn power_table(m: u64) -> Arc<Vec<Vec<BigInt>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Vec<BigInt>>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().unwrap().get(&m) {
        return Arc::clone(t);
    }
    let phi = cyclotomic_poly_arc(m);
    let deg = phi.degree().expect("cyclotomic polynomial is nonzero");
    // x^deg ≡ −(lower part of Φ_m); iterate the shift map.
    let reduced_top: Vec<BigInt> = (0..deg).map(|j| -phi.coeff(j)).collect();
    let mut table: Vec<Vec<BigInt>> = Vec::with_capacity(m as usize);
    let mut current = vec![BigInt::zero(); deg];
    current[0] = BigInt::one();
    table.push(current.clone());
    for _ in 1..m {
        let top = current[deg - 1].clone();
        let mut next = vec![BigInt::zero(); deg];
        for j in (1..deg).rev() {
            next[j] = current[j - 1].clone();
        }
        if !top.is_zero() {
            for j in 0..deg {
                if !reduced_top[j].is_zero() {
                    next[j] += &top * &reduced_top[j];
                }
            }
        }
        table.push(next.clone());
        current = next;
    }
    let arc = Arc::new(table);
    cache
        .lock()
        .unwrap()
        .entry(m)
        .or_insert_with(|| Arc::clone(&arc));
    arc
}

/// An exact element of `Z[ζ_m] = Z[x]/(Φ_m)`: coefficients of
/// `1, x, …, x^{φ(m)−1}`, always of length exactly `φ(m)`.
#[derive(Clone, Debug, Eq)]
pub struct CycInt {
    order: u64,
    coeffs: Vec<BigInt>,
}

impl CycInt {
    /// Zero of `Z[ζ_m]`.
    pub fn zero(m: u64) -> Self {
        CycInt {
            order: m,
            coeffs: vec![BigInt::zero(); euler_phi(m) as usize],
        }
    }

    /// One of `Z[ζ_m]`.
    pub fn one(m: u64) -> Self {
        let mut z = CycInt::zero(m);
        z.coeffs[0] = BigInt::one();
        z
    }

    /// A rational integer, placed in `Z[ζ_1] = Z`.
    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        CycInt {
            order: 1,
            coeffs: vec![n.into()],
        }
    }

    /// Reduces an integer polynomial in the canonical primitive root of order
    /// `m` into `Z[ζ_m]`; exponents wrap modulo `m` (as `x^m ≡ 1`) and then
    /// reduce through the cached power table.
    pub fn from_poly(m: u64, p: &IntPoly) -> Self {
        let table = power_table(m);
        let deg = euler_phi(m) as usize;
        let mut coeffs = vec![BigInt::zero(); deg];
        for (j, c) in p.coeffs().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &table[j % m as usize];
            for (t, r) in coeffs.iter_mut().zip(row.iter()) {
                if !r.is_zero() {
                    *t += c * r;
                }
            }
        }
        CycInt { order: m, coeffs }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The canonical polynomial representative (degree < `φ(m)`).
    pub fn to_poly(&self) -> IntPoly {
        IntPoly::new(self.coeffs.clone())
    }

    /// Embeds into `Z[ζ_m]` for a multiple `m` of the current order, via
    /// `x ↦ x^{m/d}`. This is the ring injection used when mixing orders.
    pub fn embed_to(&self, m: u64) -> CycInt {
        assert!(
            m % self.order == 0,
            "embedding requires the current order {} to divide the target {m}",
            self.order
        );
        if m == self.order {
            return self.clone();
        }
        let stride = (m / self.order) as usize;
        let table = power_table(m);
        let deg = euler_phi(m) as usize;
        let mut coeffs = vec![BigInt::zero(); deg];
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let row = &table[(j * stride) % m as usize];
            for (t, r) in coeffs.iter_mut().zip(row.iter()) {
                if !r.is_zero() {
                    *t += c * r;
                }
            }
        }
        CycInt { order: m, coeffs }
    }

    fn promote_pair(&self, other: &CycInt) -> (CycInt, CycInt) {
        if self.order == other.order {
            (self.clone(), other.clone())
        } else {
            let m = lcm(self.order, other.order);
            (self.embed_to(m), other.embed_to(m))
        }
    }

    pub fn add(&self, other: &CycInt) -> CycInt {
        let (mut a, b) = self.promote_pair(other);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x += y;
        }
        a
    }

    pub fn sub(&self, other: &CycInt) -> CycInt {
        let (mut a, b) = self.promote_pair(other);
        for (x, y) in a.coeffs.iter_mut().zip(b.coeffs.iter()) {
            *x -= y;
        }
        a
    }

    pub fn neg(&self) -> CycInt {
        CycInt {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> CycInt {
        CycInt {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &CycInt) -> CycInt {
        let (a, b) = self.promote_pair(other);
        let m = a.order;
        let deg = a.coeffs.len();
        if deg == 0 {
            return a;
        }
        // Sparse-aware convolution, then fold the overflow exponents through
        // the power table (exponents stay below 2·φ(m) − 1 < 2m).
        let mut conv = vec![BigInt::zero(); 2 * deg - 1];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                conv[i + j] += ai * bj;
            }
        }
        let table = power_table(m);
        let mut coeffs: Vec<BigInt> = conv[..deg].to_vec();
        for (e, c) in conv.iter().enumerate().skip(deg) {
            if c.is_zero() {
                continue;
            }
            let row = &table[e % m as usize];
            for (t, r) in coeffs.iter_mut().zip(row.iter()) {
                if !r.is_zero() {
                    *t += c * r;
                }
            }
        }
        CycInt { order: m, coeffs }
    }

    /// Galois action `x ↦ x^a` for `gcd(a, m) = 1`; a ring automorphism.
    pub fn galois_act(&self, a: i64) -> Result<CycInt> {
        galois_act(a, self)
    }

    /// Numerical embedding at the primitive root `e^{2πik/m}`, `gcd(k,m)=1`.
    pub fn complex_embed(&self, k: i64) -> Result<Complex64> {
        complex_embed(self, k)
    }
}

impl PartialEq for CycInt {
    fn eq(&self, other: &Self) -> bool {
        if self.order == other.order {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.promote_pair(other);
        a.coeffs == b.coeffs
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (order {})", self.to_poly().display_with("z"), self.order)
    }
}

#[derive(Serialize, Deserialize)]
struct CycIntDto {
    order: u64,
    coeffs: Vec<String>,
}

impl Serialize for CycInt {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CycIntDto {
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c.to_string()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CycInt {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = CycIntDto::deserialize(deserializer)?;
        if dto.order == 0 {
            return Err(D::Error::custom("order must be positive"));
        }
        let want = euler_phi(dto.order) as usize;
        if dto.coeffs.len() != want {
            return Err(D::Error::custom(format!(
                "order {} needs exactly {} coefficients, got {}",
                dto.order,
                want,
                dto.coeffs.len()
            )));
        }
        let coeffs = dto
            .coeffs
            .iter()
            .map(|s| BigInt::from_str(s.trim()).map_err(|e| D::Error::custom(e.to_string())))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(CycInt {
            order: dto.order,
            coeffs,
        })
    }
}

/// Evaluates an integer polynomial at the root of unity `ζ = e(a/b)`:
/// substitute `x ↦ x^a` and reduce modulo `Φ_b`. A surjective ring
/// homomorphism `Z[x] → Z[ζ_b]`.
pub fn eval_poly(p: &IntPoly, zeta: RootOfUnity) -> CycInt {
    let m = zeta.order();
    let a = zeta.numerator();
    let table = power_table(m);
    let deg = euler_phi(m) as usize;
    let mut coeffs = vec![BigInt::zero(); deg];
    for (j, c) in p.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = ((j as u128 * a as u128) % m as u128) as usize;
        let row = &table[e];
        for (t, r) in coeffs.iter_mut().zip(row.iter()) {
            if !r.is_zero() {
                *t += c * r;
            }
        }
    }
    CycInt { order: m, coeffs }
}

/// Galois action `x ↦ x^a` on `Z[ζ_m]`, defined for `gcd(a, m) = 1`.
pub fn galois_act(a: i64, z: &CycInt) -> Result<CycInt> {
    let m = z.order;
    let a_red = a.rem_euclid(m as i64) as u64;
    if gcd(a_red, m) != 1 {
        return Err(Error::NotAUnit { a, m });
    }
    let table = power_table(m);
    let deg = z.coeffs.len();
    let mut coeffs = vec![BigInt::zero(); deg];
    for (j, c) in z.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = ((j as u128 * a_red as u128) % m as u128) as usize;
        let row = &table[e];
        for (t, r) in coeffs.iter_mut().zip(row.iter()) {
            if !r.is_zero() {
                *t += c * r;
            }
        }
    }
    Ok(CycInt { order: m, coeffs })
}

/// Embeds a cyclotomic integer into C at the root `e^{2πik/m}`, `gcd(k,m)=1`.
/// Double precision; the sole exact-to-float bridge in the algebra layer.
pub fn complex_embed(z: &CycInt, k: i64) -> Result<Complex64> {
    let m = z.order;
    let k_red = k.rem_euclid(m as i64) as u64;
    if gcd(k_red, m) != 1 {
        return Err(Error::NotAUnit { a: k, m });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, c) in z.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let angle = 2.0 * std::f64::consts::PI * ((k_red as u128 * j as u128) % m as u128) as f64
            / m as f64;
        let c_f64 = bigint_to_f64(c);
        acc += Complex64::new(angle.cos(), angle.sin()) * c_f64;
    }
    Ok(acc)
}

/// Lossy conversion for the numeric layer (exact for |c| < 2^53).
pub(crate) fn bigint_to_f64(c: &BigInt) -> f64 {
    use num::traits::ToPrimitive;
    c.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn p(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_i64(coeffs)
    }

    #[test]
    fn root_of_unity_canonical_form() {
        assert_eq!(RootOfUnity::new(2, 4), RootOfUnity::new(1, 2));
        assert_eq!(RootOfUnity::new(5, 5), RootOfUnity::one());
        assert_eq!(RootOfUnity::new(0, 7), RootOfUnity::one());
        assert_eq!(RootOfUnity::new(3, 6).order(), 2);
        assert_eq!(RootOfUnity::new(1, 4).pow(2), RootOfUnity::new(1, 2));
        assert_eq!(RootOfUnity::new(1, 4).pow(4), RootOfUnity::one());
        assert_eq!(
            RootOfUnity::new(1, 6).mul(&RootOfUnity::new(1, 3)),
            RootOfUnity::new(1, 2)
        );
        let r = RootOfUnity::new(3, 8);
        assert_eq!(r.mul(&r.inverse()), RootOfUnity::one());
    }

    #[test]
    fn root_of_unity_parse_display() {
        for text in ["0/1", "1/4", "3/8", "5"] {
            let r: RootOfUnity = text.parse().unwrap();
            let back: RootOfUnity = r.to_string().parse().unwrap();
            assert_eq!(r, back);
        }
        assert!("1/0".parse::<RootOfUnity>().is_err());
        assert!("x/2".parse::<RootOfUnity>().is_err());
    }

    #[test]
    fn first_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), p(&[-1, 1]));
        assert_eq!(cyclotomic_poly(2), p(&[1, 1]));
        assert_eq!(cyclotomic_poly(3), p(&[1, 1, 1]));
        assert_eq!(cyclotomic_poly(4), p(&[1, 0, 1]));
        // Independent route for Φ_6: divide x⁶−1 by the product Φ_1Φ_2Φ_3
        // assembled by direct multiplication.
        let product = p(&[-1, 1]).mul(&p(&[1, 1])).mul(&p(&[1, 1, 1]));
        let x6m1 = IntPoly::monomial(6, BigInt::one()).sub(&IntPoly::one());
        let (q, r) = x6m1.divmod(&product).unwrap();
        assert!(r.is_zero());
        assert_eq!(cyclotomic_poly(6), q);
        assert_eq!(cyclotomic_poly(6), p(&[1, -1, 1]));
    }

    #[test]
    fn cyclotomic_product_identity() {
        // ∏_{d|m} Φ_d = x^m − 1, the defining factorization.
        for m in 1..=60u64 {
            let mut prod = IntPoly::one();
            for d in divisors(m) {
                prod = prod.mul(&cyclotomic_poly(d));
            }
            let target = IntPoly::monomial(m as usize, BigInt::one()).sub(&IntPoly::one());
            assert_eq!(prod, target, "m = {m}");
        }
    }

    #[test]
    fn cyclotomic_degree_is_phi() {
        for m in 1..=60u64 {
            assert_eq!(cyclotomic_poly(m).degree().unwrap() as u64, euler_phi(m));
            assert!(cyclotomic_poly(m).leading().unwrap().is_one(), "monic at {m}");
        }
    }

    #[test]
    fn reduction_matches_long_division() {
        // The cached power-table reduction must agree with plain polynomial
        // long division by Φ_m — two independent routes to the canonical form.
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let m = rng.gen_range(1..=30u64);
            let deg = rng.gen_range(0..=40usize);
            let coeffs: Vec<i64> = (0..=deg).map(|_| rng.gen_range(-9..=9)).collect();
            let poly = IntPoly::from_i64(&coeffs);
            let via_table = CycInt::from_poly(m, &poly);
            let rem = poly.rem(&cyclotomic_poly(m)).unwrap();
            let mut want = rem.coeffs().to_vec();
            want.resize(euler_phi(m) as usize, BigInt::zero());
            assert_eq!(via_table.coeffs(), &want[..], "m = {m}");
        }
    }

    #[test]
    fn eval_poly_examples() {
        // Constants map to themselves.
        let one = eval_poly(&IntPoly::one(), RootOfUnity::new(1, 12));
        assert_eq!(one, CycInt::one(12));
        // q at ζ = e(1/4) is the canonical root x of order 4.
        let q_at_i = eval_poly(&IntPoly::x(), RootOfUnity::new(1, 4));
        assert_eq!(q_at_i.coeffs(), &[BigInt::zero(), BigInt::one()]);
        // q² at e(1/4): x² ≡ −1 mod x²+1.
        let q2_at_i = eval_poly(&p(&[0, 0, 1]), RootOfUnity::new(1, 4));
        assert_eq!(q2_at_i, CycInt::from_int(-1));
    }

    #[test]
    fn eval_poly_shifts_by_numerator() {
        // At ζ = e(3/4), q evaluates to x³ ≡ −x mod Φ_4.
        let v = eval_poly(&IntPoly::x(), RootOfUnity::new(3, 4));
        assert_eq!(v.coeffs(), &[BigInt::zero(), BigInt::from(-1)]);
    }

    #[test]
    fn eval_poly_is_ring_homomorphism() {
        let mut rng = StdRng::seed_from_u64(12);
        for _ in 0..200 {
            let m = rng.gen_range(1..=24u64);
            let a = (1..=m).filter(|a| gcd(*a, m) == 1).collect::<Vec<_>>();
            let zeta = RootOfUnity::new(a[rng.gen_range(0..a.len())], m);
            let f = IntPoly::from_i64(
                &(0..rng.gen_range(1..=12)).map(|_| rng.gen_range(-5..=5)).collect::<Vec<_>>(),
            );
            let g = IntPoly::from_i64(
                &(0..rng.gen_range(1..=12)).map(|_| rng.gen_range(-5..=5)).collect::<Vec<_>>(),
            );
            assert_eq!(
                eval_poly(&f.add(&g), zeta),
                eval_poly(&f, zeta).add(&eval_poly(&g, zeta))
            );
            assert_eq!(
                eval_poly(&f.mul(&g), zeta),
                eval_poly(&f, zeta).mul(&eval_poly(&g, zeta))
            );
        }
    }

    #[test]
    fn ring_axioms_on_random_triples() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..100 {
            let m = rng.gen_range(1..=16u64);
            let rand_elt = |rng: &mut StdRng| {
                let deg = euler_phi(m) as usize;
                CycInt {
                    order: m,
                    coeffs: (0..deg).map(|_| BigInt::from(rng.gen_range(-6..=6))).collect(),
                }
            };
            let u = rand_elt(&mut rng);
            let v = rand_elt(&mut rng);
            let w = rand_elt(&mut rng);
            assert_eq!(u.mul(&v), v.mul(&u));
            assert_eq!(u.mul(&v).mul(&w), u.mul(&v.mul(&w)));
            assert_eq!(u.mul(&v.add(&w)), u.mul(&v).add(&u.mul(&w)));
        }
    }

    #[test]
    fn galois_examples() {
        // a=1 is the identity.
        let z = eval_poly(&p(&[3, 1, 0, 2]), RootOfUnity::new(1, 5));
        assert_eq!(galois_act(1, &z).unwrap(), z);
        // m=4: x ↦ x³ ≡ −x.
        let x4 = RootOfUnity::new(1, 4).as_cyc_int();
        assert_eq!(
            galois_act(3, &x4).unwrap().coeffs(),
            &[BigInt::zero(), BigInt::from(-1)]
        );
        // Non-units are rejected.
        assert!(matches!(
            galois_act(2, &x4),
            Err(Error::NotAUnit { a: 2, m: 4 })
        ));
    }

    #[test]
    fn galois_is_homomorphism_and_composes() {
        let mut rng = StdRng::seed_from_u64(14);
        for _ in 0..100 {
            let m = rng.gen_range(2..=20u64);
            let units: Vec<u64> = (1..=m).filter(|a| gcd(*a, m) == 1).collect();
            let a = units[rng.gen_range(0..units.len())] as i64;
            let b = units[rng.gen_range(0..units.len())] as i64;
            let deg = euler_phi(m) as usize;
            let mk = |rng: &mut StdRng| CycInt {
                order: m,
                coeffs: (0..deg).map(|_| BigInt::from(rng.gen_range(-5..=5))).collect(),
            };
            let u = mk(&mut rng);
            let v = mk(&mut rng);
            // Multiplicative.
            assert_eq!(
                galois_act(a, &u.mul(&v)).unwrap(),
                galois_act(a, &u).unwrap().mul(&galois_act(a, &v).unwrap())
            );
            // Composition law γ_a ∘ γ_b = γ_{ab mod m}.
            assert_eq!(
                galois_act(a, &galois_act(b, &u).unwrap()).unwrap(),
                galois_act((a * b).rem_euclid(m as i64), &u).unwrap()
            );
        }
    }

    #[test]
    fn mixed_order_equality_and_ops() {
        // 2 ∈ Z[ζ_2] equals 2 ∈ Z[ζ_4] after embedding.
        let two_low = CycInt::from_int(2);
        let two_high = CycInt::one(4).scale(&BigInt::from(2));
        assert_eq!(two_low, two_high);
        // ζ_2 = −1 embeds into order 4 as x².
        let minus_one = eval_poly(&IntPoly::x(), RootOfUnity::new(1, 2));
        let embedded = minus_one.embed_to(4);
        assert_eq!(embedded, CycInt::from_int(-1));
        // Mixed-order product: ζ_4 · ζ_2 = ζ_4³.
        let i = RootOfUnity::new(1, 4).as_cyc_int();
        let product = i.mul(&minus_one);
        assert_eq!(product, RootOfUnity::new(3, 4).as_cyc_int());
    }

    #[test]
    fn complex_embed_examples() {
        let one = CycInt::one(8);
        let v = complex_embed(&one, 1).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let i_root = RootOfUnity::new(1, 4).as_cyc_int();
        let v = complex_embed(&i_root, 1).unwrap();
        assert!((v - Complex64::new(0.0, 1.0)).norm() < 1e-15);

        // x + x³ at order 5: compare against a direct trigonometric sum.
        let z = CycInt::from_poly(5, &p(&[0, 1, 0, 1]));
        let v = complex_embed(&z, 1).unwrap();
        let t = 2.0 * std::f64::consts::PI / 5.0;
        let want = Complex64::new(t.cos() + (3.0 * t).cos(), t.sin() + (3.0 * t).sin());
        assert!((v - want).norm() < 1e-14);

        assert!(complex_embed(&CycInt::one(4), 2).is_err());
    }

    #[test]
    fn complex_embed_respects_ring_ops() {
        let mut rng = StdRng::seed_from_u64(15);
        for _ in 0..100 {
            let m = rng.gen_range(1..=24u64);
            let deg = euler_phi(m) as usize;
            let mk = |rng: &mut StdRng| CycInt {
                order: m,
                coeffs: (0..deg)
                    .map(|_| BigInt::from(rng.gen_range(-1000..=1000)))
                    .collect(),
            };
            let u = mk(&mut rng);
            let v = mk(&mut rng);
            let eu = complex_embed(&u, 1).unwrap();
            let ev = complex_embed(&v, 1).unwrap();
            let es = complex_embed(&u.add(&v), 1).unwrap();
            let ep = complex_embed(&u.mul(&v), 1).unwrap();
            // Values reach ~10³·φ(m) (sums) and ~10⁶·φ(m)² (products), so the
            // 1e-12 agreement target is relative with a floor of 1.
            let sum_scale = 1.0_f64.max(es.norm());
            assert!((es - (eu + ev)).norm() / sum_scale < 1e-12);
            let prod_scale = 1.0_f64.max(ep.norm());
            assert!((ep - eu * ev).norm() / prod_scale < 1e-12);
        }
    }

    #[test]
    fn serde_round_trip() {
        let z = CycInt::from_poly(12, &p(&[3, -1, 0, 4, 2]));
        let json = serde_json::to_string(&z).unwrap();
        let back: CycInt = serde_json::from_str(&json).unwrap();
        assert_eq!(z, back);
        assert!(json.contains("\"order\":12"));
        // Wrong coefficient count is rejected.
        let bad = r#"{"order":4,"coeffs":["1"]}"#;
        assert!(serde_json::from_str::<CycInt>(bad).is_err());
    }
}
