//! Dense univariate polynomials over Z with exact division.
//!
//! This is the workhorse representation behind cyclotomic polynomials and
//! level-truncated Habiro arithmetic. Coefficients are arbitrary-precision
//! integers in ascending degree order with no trailing zeros, so every
//! polynomial has a unique representation and `==` is mathematical equality.
//!
//! Division is supported against divisors whose leading coefficient is ±1
//! (all ideal generators in this crate are of that shape: `Φ_m`, `x^m − 1`,
//! `(1−q)(1−q²)···(1−q^N)` up to sign), which keeps remainder computation
//! exact over Z with no pseudo-division scaling.

use std::fmt;
use std::str::FromStr;

use num::bigint::BigInt;
use num::traits::{One, Signed, Zero};

use crate::error::Error;

/// A polynomial with integer coefficients, stored densely in ascending
/// degree order with no trailing zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// zeros to canonical form.
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(coeffs: &[i64]) -> Self {
        IntPoly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The zero polynomial.
    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    /// The constant polynomial 1.
    pub fn one() -> Self {
        IntPoly {
            coeffs: vec![BigInt::one()],
        }
    }

    /// The monomial `c·x^k`.
    pub fn monomial(k: usize, c: BigInt) -> Self {
        if c.is_zero() {
            return IntPoly::zero();
        }
        let mut coeffs = vec![BigInt::zero(); k + 1];
        coeffs[k] = c;
        IntPoly { coeffs }
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        IntPoly::monomial(1, BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Coefficient of `x^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> BigInt {
        self.coeffs.get(k).cloned().unwrap_or_else(BigInt::zero)
    }

    /// Ascending coefficient slice (empty for zero).
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) + other.coeff(k));
        }
        IntPoly::new(out)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            out.push(self.coeff(k) - other.coeff(k));
        }
        IntPoly::new(out)
    }

    pub fn neg(&self) -> IntPoly {
        IntPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, c: &BigInt) -> IntPoly {
        if c.is_zero() {
            return IntPoly::zero();
        }
        IntPoly {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Product, skipping zero coefficients of the sparser operand so that
    /// the frequent "few nonzero terms" case costs what it should.
    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let (a, b) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = vec![BigInt::zero(); a.coeffs.len() + b.coeffs.len() - 1];
        for (i, ai) in a.coeffs.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.coeffs.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                out[i + j] += ai * bj;
            }
        }
        IntPoly::new(out)
    }

    /// Integer power by repeated squaring.
    pub fn pow(&self, mut e: u32) -> IntPoly {
        let mut base = self.clone();
        let mut acc = IntPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Quotient and remainder against a divisor with leading coefficient ±1.
    ///
    /// Returns `None` when the divisor is zero or its leading coefficient is
    /// not a unit of Z (in which case division over Z is not generally exact).
    pub fn divmod(&self, divisor: &IntPoly) -> Option<(IntPoly, IntPoly)> {
        let dlead = divisor.leading()?;
        if !dlead.is_one() && !(-dlead).is_one() {
            return None;
        }
        let ddeg = divisor.coeffs.len() - 1;
        let mut rem = self.coeffs.clone();
        if rem.len() <= ddeg {
            return Some((IntPoly::zero(), IntPoly::new(rem)));
        }
        let qlen = rem.len() - ddeg;
        let mut quot = vec![BigInt::zero(); qlen];
        let lead_is_one = dlead.is_one();
        for k in (0..qlen).rev() {
            let top = std::mem::take(&mut rem[k + ddeg]);
            if top.is_zero() {
                continue;
            }
            let q = if lead_is_one { top } else { -top };
            for (j, dj) in divisor.coeffs.iter().take(ddeg).enumerate() {
                if !dj.is_zero() {
                    let sub = dj * &q;
                    rem[k + j] -= sub;
                }
            }
            quot[k] = q;
        }
        rem.truncate(ddeg);
        Some((IntPoly::new(quot), IntPoly::new(rem)))
    }

    /// Remainder modulo a ±1-leading divisor.
    pub fn rem(&self, divisor: &IntPoly) -> Option<IntPoly> {
        self.divmod(divisor).map(|(_, r)| r)
    }

    /// Exact quotient; panics if the division leaves a remainder. Used where
    /// divisibility is a theorem (cyclotomic products, ideal members).
    pub fn div_exact(&self, divisor: &IntPoly) -> IntPoly {
        let (q, r) = self
            .divmod(divisor)
            .expect("divisor must have unit leading coefficient");
        assert!(r.is_zero(), "division was expected to be exact");
        q
    }

    /// Substitutes `x ↦ x^n`, spreading coefficient `k` to degree `n·k`.
    pub fn substitute_power(&self, n: u32) -> IntPoly {
        assert!(n >= 1, "substitute_power needs n >= 1");
        if self.is_zero() {
            return IntPoly::zero();
        }
        let deg = self.coeffs.len() - 1;
        let mut out = vec![BigInt::zero(); deg * n as usize + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                out[k * n as usize] = c.clone();
            }
        }
        IntPoly::new(out)
    }

    /// Renders with the given variable name, ascending degree, in the text
    /// syntax accepted by [`IntPoly::parse`] (e.g. `1 - q - q^2 + q^3`).
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    out.push('-');
                }
                first = false;
            } else if c.is_negative() {
                out.push_str(" - ");
            } else {
                out.push_str(" + ");
            }
            let coeff_part = if mag.is_one() && k > 0 {
                String::new()
            } else {
                mag.to_string()
            };
            out.push_str(&coeff_part);
            if k > 0 {
                if !coeff_part.is_empty() {
                    out.push('*');
                }
                out.push_str(var);
                if k > 1 {
                    out.push('^');
                    out.push_str(&k.to_string());
                }
            }
        }
        out
    }

    /// Parses the textual syntax `c0 + c1*v + c2 v^2 - ...` where `v` is the
    /// given variable name, `*` is optional, and exponents use `^`.
    pub fn parse(input: &str, var: &str) -> Result<IntPoly, Error> {
        let s = input.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        let mut coeffs: Vec<BigInt> = Vec::new();
        let mut add_term = |deg: usize, c: BigInt| {
            if coeffs.len() <= deg {
                coeffs.resize(deg + 1, BigInt::zero());
            }
            coeffs[deg] += c;
        };
        let chars: Vec<char> = s.chars().collect();
        let mut i = 0usize;
        let mut sign = BigInt::one();
        let mut expect_term = true;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '+' || c == '-' {
                if expect_term && c == '-' {
                    sign = -sign;
                    i += 1;
                    continue;
                }
                if expect_term {
                    i += 1;
                    continue;
                }
                sign = if c == '-' { -BigInt::one() } else { BigInt::one() };
                expect_term = true;
                i += 1;
                continue;
            }
            if !expect_term {
                return Err(Error::Parse(format!(
                    "unexpected '{c}' at position {i} in {input:?}"
                )));
            }
            // Optional integer coefficient.
            let mut coeff: Option<BigInt> = None;
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                coeff = Some(BigInt::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?);
                while i < chars.len() && chars[i].is_whitespace() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '*' {
                    i += 1;
                    while i < chars.len() && chars[i].is_whitespace() {
                        i += 1;
                    }
                }
            }
            // Optional variable with optional exponent.
            let mut deg = 0usize;
            let has_var = chars[i..].iter().collect::<String>().starts_with(var)
                && i < chars.len();
            if has_var {
                i += var.chars().count();
                deg = 1;
                while i < chars.len() && chars[i].is_whitespace() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '^' {
                    i += 1;
                    while i < chars.len() && chars[i].is_whitespace() {
                        i += 1;
                    }
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(Error::Parse(format!("missing exponent in {input:?}")));
                    }
                    let text: String = chars[start..i].iter().collect();
                    deg = text
                        .parse::<usize>()
                        .map_err(|e| Error::Parse(e.to_string()))?;
                }
            }
            let base = match coeff {
                Some(c) => c,
                None if deg > 0 => BigInt::one(),
                None => {
                    return Err(Error::Parse(format!(
                        "expected coefficient or '{var}' at position {i} in {input:?}"
                    )))
                }
            };
            add_term(deg, sign.clone() * base);
            sign = BigInt::one();
            expect_term = false;
        }
        if expect_term {
            return Err(Error::Parse(format!("dangling sign in {input:?}")));
        }
        Ok(IntPoly::new(coeffs))
    }

    /// Coefficients as decimal strings (ascending), the JSON wire format.
    pub fn to_dec_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    /// Rebuilds from decimal strings.
    pub fn from_dec_strings(strings: &[String]) -> Result<IntPoly, Error> {
        let coeffs = strings
            .iter()
            .map(|s| BigInt::from_str(s.trim()).map_err(|e| Error::Parse(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntPoly::new(coeffs))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with("x"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(coeffs: &[i64]) -> IntPoly {
        IntPoly::from_i64(coeffs)
    }

    #[test]
    fn canonical_form_trims_trailing_zeros() {
        assert_eq!(p(&[1, 2, 0, 0]), p(&[1, 2]));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
        assert_eq!(p(&[5]).degree(), Some(0));
    }

    #[test]
    fn ring_ops_small_cases() {
        let a = p(&[1, 1]); // 1 + x
        let b = p(&[-1, 1]); // -1 + x
        assert_eq!(a.mul(&b), p(&[-1, 0, 1])); // x² - 1
        assert_eq!(a.add(&b), p(&[0, 2]));
        assert_eq!(a.sub(&a), IntPoly::zero());
        assert_eq!(a.pow(2), p(&[1, 2, 1]));
        assert_eq!(a.pow(0), IntPoly::one());
    }

    #[test]
    fn divmod_reconstructs_dividend() {
        // (x³ + 2x + 7) ÷ (x² - 1), remainder degree < 2.
        let f = p(&[7, 2, 0, 1]);
        let d = p(&[-1, 0, 1]);
        let (q, r) = f.divmod(&d).unwrap();
        assert_eq!(q.mul(&d).add(&r), f);
        assert!(r.degree().unwrap_or(0) < 2);

        // Division by a -1-leading divisor, e.g. 1 - x.
        let d2 = p(&[1, -1]);
        let (q2, r2) = f.divmod(&d2).unwrap();
        assert_eq!(q2.mul(&d2).add(&r2), f);
        // Remainder is the value at x=1: 7 + 2 + 1 = 10.
        assert_eq!(r2, p(&[10]));
    }

    #[test]
    fn divmod_rejects_non_unit_lead() {
        assert!(p(&[1, 1]).divmod(&p(&[1, 2])).is_none());
        assert!(p(&[1, 1]).divmod(&IntPoly::zero()).is_none());
    }

    #[test]
    fn substitute_power_spreads_exponents() {
        let f = p(&[1, 2, 3]); // 1 + 2x + 3x²
        assert_eq!(f.substitute_power(2), p(&[1, 0, 2, 0, 3]));
        assert_eq!(f.substitute_power(1), f);
    }

    #[test]
    fn parse_round_trip() {
        for text in [
            "1 - q - q^2 + q^3",
            "q",
            "-q^5",
            "3",
            "2*q^3 + q",
            "1 + 2 q^2",
            "-1 - q",
        ] {
            let parsed = IntPoly::parse(text, "q").unwrap();
            let reparsed = IntPoly::parse(&parsed.display_with("q"), "q").unwrap();
            assert_eq!(parsed, reparsed, "round trip of {text:?}");
        }
        assert_eq!(
            IntPoly::parse("1 - q - q^2 + q^3", "q").unwrap(),
            p(&[1, -1, -1, 1])
        );
        assert_eq!(IntPoly::parse("t + 1", "t").unwrap(), p(&[1, 1]));
        // Repeated monomials accumulate.
        assert_eq!(IntPoly::parse("q + q", "q").unwrap(), p(&[0, 2]));
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(IntPoly::parse("", "q").is_err());
        assert!(IntPoly::parse("q^", "q").is_err());
        assert!(IntPoly::parse("1 +", "q").is_err());
        assert!(IntPoly::parse("y + 1", "q").is_err());
    }

    #[test]
    fn dec_string_round_trip() {
        let f = p(&[0, -7, 123456789]);
        let strings = f.to_dec_strings();
        assert_eq!(IntPoly::from_dec_strings(&strings).unwrap(), f);
    }
}
