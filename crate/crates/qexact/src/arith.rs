//! Small elementary number-theory helpers shared across modules.

use num::bigint::BigInt;
use num::traits::{One, Zero};

/// Greatest common divisor on `u64` (gcd(0, n) = n).
pub fn gcd(a: u64, b: u64) -> u64 {
    num::integer::gcd(a, b)
}

/// Least common multiple on `u64`.
pub fn lcm(a: u64, b: u64) -> u64 {
    num::integer::lcm(a, b)
}

/// Euler's totient φ(m), by trial-division factorization (m fits u64; the
/// orders in play are small, so no fancy factoring is warranted).
pub fn euler_phi(m: u64) -> u64 {
    assert!(m >= 1, "euler_phi(0) undefined");
    let mut n = m;
    let mut phi = m;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// All positive divisors of `m`, ascending.
pub fn divisors(m: u64) -> Vec<u64> {
    assert!(m >= 1);
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= m {
        if m % d == 0 {
            small.push(d);
            if d != m / d {
                large.push(m / d);
            }
        }
        d += 1;
    }
    large.reverse();
    small.extend(large);
    small
}

/// Divisor sum σ₁(m) = Σ_{d|m} d.
pub fn sigma1(m: u64) -> u64 {
    divisors(m).into_iter().sum()
}

/// Modular inverse of `a` modulo `m`, if gcd(a, m) = 1.
pub fn mod_inverse(a: i64, m: u64) -> Option<u64> {
    let m_i = m as i64;
    let (mut r0, mut r1) = (m_i, a.rem_euclid(m_i));
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(m_i) as u64)
}

/// Primality by trial division (inputs in play are tiny).
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Binomial coefficient C(n, k) as an exact big integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_small_values() {
        // Independent table (first values of the totient function).
        let table = [1u64, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (i, want) in table.iter().enumerate() {
            assert_eq!(euler_phi(i as u64 + 1), *want, "phi({})", i + 1);
        }
    }

    #[test]
    fn phi_is_multiplicative_on_coprimes() {
        for a in 1..30u64 {
            for b in 1..30u64 {
                if gcd(a, b) == 1 {
                    assert_eq!(euler_phi(a * b), euler_phi(a) * euler_phi(b));
                }
            }
        }
    }

    #[test]
    fn divisors_and_sigma1() {
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        assert_eq!(sigma1(1), 1);
        assert_eq!(sigma1(2), 3);
        assert_eq!(sigma1(6), 12);
        // σ₁ is multiplicative on coprime arguments.
        for a in 1..40u64 {
            for b in 1..40u64 {
                if gcd(a, b) == 1 {
                    assert_eq!(sigma1(a * b), sigma1(a) * sigma1(b));
                }
            }
        }
    }

    #[test]
    fn mod_inverse_round_trips() {
        for m in 2..50u64 {
            for a in 1..m {
                match mod_inverse(a as i64, m) {
                    Some(inv) => {
                        assert_eq!(gcd(a, m), 1);
                        assert_eq!((a as u128 * inv as u128) % m as u128, 1);
                    }
                    None => assert_ne!(gcd(a, m), 1),
                }
            }
        }
    }

    #[test]
    fn is_prime_matches_divisor_count() {
        for n in 0..200u64 {
            assert_eq!(is_prime(n), n >= 2 && divisors(n).len() == 2, "n = {n}");
        }
    }

    #[test]
    fn binomial_pascal_identity() {
        for n in 1..25u64 {
            for k in 1..n {
                assert_eq!(
                    binomial(n, k),
                    binomial(n - 1, k - 1) + binomial(n - 1, k),
                    "C({n},{k})"
                );
            }
        }
        assert_eq!(binomial(10, 5), BigInt::from(252));
        assert_eq!(binomial(5, 9), BigInt::zero());
    }
}
