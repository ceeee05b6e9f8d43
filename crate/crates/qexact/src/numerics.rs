//! Floating-point helpers for the statistical-mechanics modules: compensated
//! summation and partial zeta sums with certified tail intervals.
//!
//! The exact-algebra modules never touch floating point; everything here
//! exists so that the numeric layers can quote error bounds instead of bare
//! truncations.

use crate::error::Error;

/// Kahan–Neumaier compensated accumulator. Adding terms whose magnitudes vary
/// wildly loses low-order bits in a naive sum; carrying the rounding remainder
/// in a second word keeps the total accurate to within a few ulps of the
/// exact sum, which matters when comparisons run at 1e-12 relative tolerance.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        NeumaierSum::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// A truncated Dirichlet sum together with a certified enclosure of the
/// dropped tail: the true infinite sum lies in
/// `[value + tail_lo, value + tail_hi]` up to floating-point rounding.
#[derive(Clone, Copy, Debug)]
pub struct PartialZeta {
    /// `sum_{n=1}^{cap} n^{-s}`, compensated.
    pub value: f64,
    /// Lower bound for the dropped tail: `(cap+1)^{1-s} / (s-1)`.
    pub tail_lo: f64,
    /// Upper bound for the dropped tail: `cap^{1-s} / (s-1)`.
    pub tail_hi: f64,
}

impl PartialZeta {
    /// Whether `x` is consistent with the enclosed infinite sum.
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        x >= self.value + self.tail_lo - slack && x <= self.value + self.tail_hi + slack
    }
}

/// Computes `sum_{n=1}^{cap} n^{-s}` for `s > 1` with integral tail bounds
/// (the tail is squeezed between the integrals of `x^{-s}` from `cap+1` and
/// from `cap`).
pub fn zeta_partial(s: f64, cap: u64) -> Result<PartialZeta, Error> {
    if !(s > 1.0) {
        return Err(Error::BetaOutOfRange { beta: s, min: 1.0 });
    }
    let mut acc = NeumaierSum::new();
    for n in 1..=cap {
        acc.add((n as f64).powf(-s));
    }
    Ok(PartialZeta {
        value: acc.total(),
        tail_lo: ((cap + 1) as f64).powf(1.0 - s) / (s - 1.0),
        tail_hi: (cap as f64).powf(1.0 - s) / (s - 1.0),
    })
}

/// Closed form of the truncated geometric sum `sum_{m=0}^{cap} r^m` for
/// `0 < r < 1`, i.e. `(1 - r^{cap+1}) / (1 - r)`.
pub fn geometric_partial(r: f64, cap: u64) -> f64 {
    debug_assert!(0.0 < r && r < 1.0);
    (1.0 - r.powi(cap as i32 + 1)) / (1.0 - r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_survives_cancellation() {
        // Naive summation returns 0 here; the compensated one recovers 2.
        let mut acc = NeumaierSum::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            acc.add(x);
        }
        assert_eq!(acc.total(), 2.0);
    }

    #[test]
    fn compensated_sum_matches_exact_rational_oracle() {
        // Sum 1/k for k=1..1000 computed exactly with rationals, then rounded.
        use num::rational::BigRational;
        use num::traits::{ToPrimitive, Zero};
        let mut exact = BigRational::zero();
        let mut acc = NeumaierSum::new();
        for k in 1..=1000u64 {
            exact += BigRational::new(1.into(), k.into());
            acc.add(1.0 / k as f64);
        }
        let expect = exact.to_f64().unwrap();
        assert!((acc.total() - expect).abs() <= 1e-14 * expect);
    }

    #[test]
    fn zeta_partial_encloses_known_value() {
        // zeta(2) = pi^2/6.
        let z = zeta_partial(2.0, 10_000).unwrap();
        let truth = std::f64::consts::PI * std::f64::consts::PI / 6.0;
        assert!(z.contains(truth, 1e-12));
        assert!(z.tail_lo <= z.tail_hi);
        // The enclosure is tight: width is O(cap^-2) for s = 2.
        assert!(z.tail_hi - z.tail_lo < 2e-8);
    }

    #[test]
    fn zeta_partial_rejects_divergent_exponent() {
        assert!(matches!(
            zeta_partial(1.0, 10),
            Err(Error::BetaOutOfRange { .. })
        ));
        assert!(matches!(
            zeta_partial(0.5, 10),
            Err(Error::BetaOutOfRange { .. })
        ));
    }

    #[test]
    fn geometric_partial_matches_loop() {
        for &r in &[0.1f64, 0.5, 0.9] {
            for cap in [0u64, 1, 5, 40] {
                let mut direct = 0.0;
                for m in 0..=cap {
                    direct += r.powi(m as i32);
                }
                assert!((geometric_partial(r, cap) - direct).abs() < 1e-12 * direct.max(1.0));
            }
        }
    }
}
