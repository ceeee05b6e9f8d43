//! Braid words with an explicit full-twist exponent and the writhe-twist
//! endomorphism family.
//!
//! A [`BraidWord`] on `N ≥ 2` strands is a sequence of signed generator
//! letters `s_i^{±1}` (`1 ≤ i ≤ N−1`) together with a separate integer
//! exponent of the full twist `T_N = (s_1 ⋯ s_{N−1})^N`, which generates the
//! center of the braid group.  Keeping the central part as a bookkeeping
//! integer instead of letters makes the twist endomorphisms
//! `ρ_m : γ ↦ γ·T_N^{m·ℓ(γ)}` — where `ℓ` is the writhe — exactly
//! computable: `ρ_m` only shifts the twist exponent.
//!
//! Words are compared either verbatim or after *free reduction* (cancelling
//! adjacent `s_i s_i^{-1}` pairs only; no braid relations are applied).
//! That is deliberately coarser than a braid normal form, but it is exact,
//! fast, and sufficient for the identities verified here: the composition
//! law `ρ_{n_1}∘ρ_{n_2} = ρ_{n_1+n_2+n_1 n_2 N(N−1)}`, equivariance under
//! conjugation, and the action on torus-knot words
//! `(a,b) ↦ (a, b(1+m·a(a−1)))` realized letter by letter through
//! [`expanded_letters`].

use std::fmt;

use crate::error::Error;

/// A braid-group element on `strands` strands, written as free-group
/// letters times a power of the central full twist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraidWord {
    strands: usize,
    /// Signed generator indices: `+i` is `s_i`, `−i` is `s_i^{-1}`.
    letters: Vec<i32>,
    /// Exponent of the full twist `T_N`.
    center_exp: i64,
}

impl BraidWord {
    /// A word from signed letters and a full-twist exponent.  Letters must
    /// be nonzero with `|letter| ≤ strands − 1`.
    pub fn new(strands: usize, letters: Vec<i32>, center_exp: i64) -> Self {
        assert!(strands >= 2, "a braid group needs at least two strands");
        for &l in &letters {
            assert!(
                l != 0 && (l.unsigned_abs() as usize) < strands,
                "letter {l} is not a generator index on {strands} strands"
            );
        }
        BraidWord {
            strands,
            letters,
            center_exp,
        }
    }

    /// The empty word.
    pub fn identity(strands: usize) -> Self {
        BraidWord::new(strands, Vec::new(), 0)
    }

    /// The full twist `T_N`, kept in the center exponent.
    pub fn full_twist(strands: usize) -> Self {
        BraidWord::new(strands, Vec::new(), 1)
    }

    /// The torus-knot word `(s_1 ⋯ s_{a−1})^b` on `a` strands.
    pub fn torus_word(a: usize, b: u64) -> Self {
        assert!(a >= 2, "torus words need at least two strands");
        let mut letters = Vec::with_capacity((a - 1) * b as usize);
        for _ in 0..b {
            letters.extend((1..a).map(|i| i as i32));
        }
        BraidWord::new(a, letters, 0)
    }

    /// Number of strands.
    pub fn strands(&self) -> usize {
        self.strands
    }

    /// The non-central letters, signed.
    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    /// The full-twist exponent.
    pub fn center_exp(&self) -> i64 {
        self.center_exp
    }

    /// The writhe (exponent sum): signed letter count plus
    /// `center_exp · N(N−1)`, the letter count of one full twist.
    pub fn writhe(&self) -> i64 {
        let letter_sum: i64 = self.letters.iter().map(|&l| l.signum() as i64).sum();
        let n = self.strands as i64;
        letter_sum + self.center_exp * n * (n - 1)
    }

    /// Cancels adjacent inverse pairs `s_i s_i^{-1}` until none remain.
    /// One stack pass reaches the free-reduction fixpoint.
    pub fn free_reduce(&self) -> BraidWord {
        let mut stack: Vec<i32> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&-l) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        BraidWord::new(self.strands, stack, self.center_exp)
    }

    /// Concatenation `self · other` (letters appended, twist exponents
    /// added); no reduction is performed.
    pub fn compose(&self, other: &BraidWord) -> BraidWord {
        assert_eq!(self.strands, other.strands, "strand counts must agree");
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        BraidWord::new(self.strands, letters, self.center_exp + other.center_exp)
    }

    /// The inverse word: letters reversed and negated, twist negated.
    pub fn inverse(&self) -> BraidWord {
        let letters = self.letters.iter().rev().map(|&l| -l).collect();
        BraidWord::new(self.strands, letters, -self.center_exp)
    }

    /// The freely reduced conjugate `by · self · by^{-1}`.
    pub fn conjugate(&self, by: &BraidWord) -> BraidWord {
        by.compose(self).compose(&by.inverse()).free_reduce()
    }

    /// Equality after free reduction (letters, twist, and strand count).
    pub fn equals_freely(&self, other: &BraidWord) -> bool {
        self.strands == other.strands && self.free_reduce() == other.free_reduce()
    }

    /// The word with the central part spelled out: the letters followed by
    /// `center_exp` copies of the full-twist letters
    /// `(s_1 ⋯ s_{N−1})^N` (inverted copies for a negative exponent).
    pub fn expanded_letters(&self) -> Vec<i32> {
        let mut twist: Vec<i32> = Vec::new();
        for _ in 0..self.strands {
            twist.extend((1..self.strands).map(|i| i as i32));
        }
        let mut out = self.letters.clone();
        if self.center_exp >= 0 {
            for _ in 0..self.center_exp {
                out.extend_from_slice(&twist);
            }
        } else {
            let inverse_twist: Vec<i32> = twist.iter().rev().map(|&l| -l).collect();
            for _ in 0..-self.center_exp {
                out.extend_from_slice(&inverse_twist);
            }
        }
        out
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() && self.center_exp == 0 {
            return write!(f, "e");
        }
        let mut first = true;
        for &l in &self.letters {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if l > 0 {
                write!(f, "s{l}")?;
            } else {
                write!(f, "s{}^-1", -l)?;
            }
        }
        if self.center_exp != 0 {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "T^{}", self.center_exp)?;
        }
        Ok(())
    }
}

/// Parses a space-separated word of signed generators, e.g. `"s1 s2^-1"`.
pub fn parse_word(strands: usize, text: &str) -> Result<BraidWord, Error> {
    assert!(strands >= 2, "a braid group needs at least two strands");
    let mut letters = Vec::new();
    for token in text.split_whitespace() {
        let (body, sign) = match token.strip_suffix("^-1") {
            Some(body) => (body, -1i32),
            None => (token, 1),
        };
        let index = body
            .strip_prefix('s')
            .and_then(|d| d.parse::<i32>().ok())
            .ok_or_else(|| Error::Parse(format!("unrecognized braid letter `{token}`")))?;
        if index < 1 || index as usize >= strands {
            return Err(Error::Parse(format!(
                "generator index in `{token}` must lie in 1..={} on {strands} strands",
                strands - 1
            )));
        }
        letters.push(sign * index);
    }
    Ok(BraidWord::new(strands, letters, 0))
}

/// The writhe-twist endomorphism `ρ_m : γ ↦ γ·T_N^{m·ℓ(γ)}`.  Only the
/// central exponent moves; the letters are untouched.
pub fn rho_endo(word: &BraidWord, m: i64) -> BraidWord {
    BraidWord::new(
        word.strands,
        word.letters.clone(),
        word.center_exp + m * word.writhe(),
    )
}

/// Verifies the composition law of the twist family on a concrete word:
/// `ρ_{n1}(ρ_{n2}(γ))` must equal `γ·T_N^{(n1+n2+n1·n2·N(N−1))·ℓ(γ)}`
/// verbatim — same letters, same twist exponent.
pub fn compose_identity_check(word: &BraidWord, n1: i64, n2: i64) -> bool {
    let staged = rho_endo(&rho_endo(word, n2), n1);
    let n = word.strands as i64;
    let combined = n1 + n2 + n1 * n2 * n * (n - 1);
    let direct = BraidWord::new(
        word.strands,
        word.letters.clone(),
        word.center_exp + combined * word.writhe(),
    );
    staged == direct
}

/// Verifies equivariance under conjugation on concrete words:
/// `ρ_m(α γ α^{-1})` and `α·ρ_m(γ)·α^{-1}` must agree after free
/// reduction.  (Conjugation preserves the writhe, so both sides carry the
/// same twist shift.)
pub fn conjugation_equivariance_check(alpha: &BraidWord, word: &BraidWord, m: i64) -> bool {
    let lhs = rho_endo(&word.conjugate(alpha), m);
    let rhs = rho_endo(word, m).conjugate(alpha);
    lhs.equals_freely(&rhs)
}

/// The twist action on torus-knot parameters:
/// `(a, b) ↦ (a, b·(1 + m·a(a−1)))`.  Realized at word level:
/// `ρ_m` sends `(s_1⋯s_{a−1})^b` to `(s_1⋯s_{a−1})^b·T_a^{m·b(a−1)}`, and
/// expanding the twists gives exactly `(s_1⋯s_{a−1})^{b'}`.
pub fn torus_knot_action(a: u64, b: u64, m: u64) -> (u64, u64) {
    assert!(a >= 2, "torus knots need at least two strands");
    assert!(b >= 1, "torus exponent must be positive");
    (a, b * (1 + m * a * (a - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn word(strands: usize, letters: &[i32]) -> BraidWord {
        BraidWord::new(strands, letters.to_vec(), 0)
    }

    fn random_word(rng: &mut StdRng, strands: usize, max_len: usize) -> BraidWord {
        let len = rng.gen_range(0..=max_len);
        let letters = (0..len)
            .map(|_| {
                let idx = rng.gen_range(1..strands as i32);
                if rng.gen_bool(0.5) {
                    idx
                } else {
                    -idx
                }
            })
            .collect();
        BraidWord::new(strands, letters, rng.gen_range(-3..=3))
    }

    #[test]
    fn writhe_examples() {
        assert_eq!(word(3, &[1, 2]).writhe(), 2);
        assert_eq!(BraidWord::full_twist(3).writhe(), 6);
        assert_eq!(word(2, &[1, -1]).writhe(), 0);
        // The twist exponent weighs in at N(N−1) per unit.
        assert_eq!(BraidWord::new(4, vec![1, -2, 3], 2).writhe(), 1 + 2 * 12);
    }

    #[test]
    fn free_reduction_cancels_and_preserves_writhe() {
        let reducible = word(3, &[1, 2, -2, -1, 2]);
        let reduced = reducible.free_reduce();
        assert_eq!(reduced.letters(), &[2]);
        assert_eq!(reducible.writhe(), reduced.writhe());

        // A word composed with its inverse reduces to the identity.
        let mut rng = StdRng::seed_from_u64(601);
        for _ in 0..100 {
            let strands = rng.gen_range(2..=6);
            let gamma = random_word(&mut rng, strands, 15);
            let collapsed = gamma.compose(&gamma.inverse()).free_reduce();
            assert!(collapsed.letters().is_empty());
            assert_eq!(collapsed.center_exp(), 0);

            // Reduction is idempotent and writhe-preserving.
            let reduced = gamma.free_reduce();
            assert_eq!(reduced.free_reduce(), reduced);
            assert_eq!(reduced.writhe(), gamma.writhe());
        }
    }

    #[test]
    fn writhe_is_additive_under_composition() {
        let mut rng = StdRng::seed_from_u64(602);
        for _ in 0..100 {
            let strands = rng.gen_range(2..=6);
            let a = random_word(&mut rng, strands, 12);
            let b = random_word(&mut rng, strands, 12);
            assert_eq!(a.compose(&b).writhe(), a.writhe() + b.writhe());
            assert_eq!(a.inverse().writhe(), -a.writhe());
            assert_eq!(a.conjugate(&b).writhe(), a.writhe());
        }
    }

    #[test]
    fn twist_endomorphism_examples() {
        let gamma = word(3, &[1, 2]);
        // m = 0 is the identity.
        assert_eq!(rho_endo(&gamma, 0), gamma);

        // s_1 in B_2 has writhe 1; ρ_1 sends it to s_1·T_2 = s_1^3.
        let s1 = word(2, &[1]);
        let image = rho_endo(&s1, 1);
        assert_eq!(image.letters(), &[1]);
        assert_eq!(image.center_exp(), 1);
        assert_eq!(image.expanded_letters(), vec![1, 1, 1]);

        // Negative twists expand to inverse letters.
        assert_eq!(
            BraidWord::new(2, vec![], -1).expanded_letters(),
            vec![-1, -1]
        );
    }

    #[test]
    fn composition_law_examples_and_random_words() {
        // Hand example: γ = s_1 in B_3 (writhe 1), n1 = n2 = 1 gives the
        // combined exponent 1 + 1 + 1·1·6 = 8.
        let gamma = word(3, &[1]);
        let staged = rho_endo(&rho_endo(&gamma, 1), 1);
        assert_eq!(staged.center_exp(), 8);
        assert!(compose_identity_check(&gamma, 1, 1));
        // n1 = 0 collapses to a single application.
        assert_eq!(rho_endo(&rho_endo(&gamma, 0), 2), rho_endo(&gamma, 2));

        let mut rng = StdRng::seed_from_u64(603);
        for _ in 0..200 {
            let strands = rng.gen_range(2..=6);
            let gamma = random_word(&mut rng, strands, 20);
            let n1 = rng.gen_range(0..=5);
            let n2 = rng.gen_range(0..=5);
            assert!(compose_identity_check(&gamma, n1, n2), "γ = {gamma}");
        }
        // The law is polynomial in the twist parameters, so it also holds
        // for negative m.
        assert!(compose_identity_check(&word(4, &[3, -1, 2]), -2, 3));
    }

    #[test]
    fn conjugation_equivariance_examples_and_random_words() {
        // Conjugating by the identity is trivial equivariance.
        let gamma = word(3, &[2]);
        assert!(conjugation_equivariance_check(
            &BraidWord::identity(3),
            &gamma,
            2
        ));

        // α = s_1, γ = s_2 in B_3: both sides are s_1 s_2 s_1^{-1}·T^2.
        let alpha = word(3, &[1]);
        let lhs = rho_endo(&gamma.conjugate(&alpha), 2);
        assert_eq!(lhs.letters(), &[1, 2, -1]);
        assert_eq!(lhs.center_exp(), 2);
        assert!(conjugation_equivariance_check(&alpha, &gamma, 2));

        let mut rng = StdRng::seed_from_u64(604);
        for _ in 0..100 {
            let strands = rng.gen_range(2..=6);
            let alpha = random_word(&mut rng, strands, 10);
            let gamma = random_word(&mut rng, strands, 12);
            let m = rng.gen_range(-3..=3);
            assert!(
                conjugation_equivariance_check(&alpha, &gamma, m),
                "α = {alpha}, γ = {gamma}, m = {m}"
            );
        }
    }

    #[test]
    fn torus_knot_action_matches_word_expansion() {
        assert_eq!(torus_knot_action(2, 3, 1), (2, 9));
        assert_eq!(torus_knot_action(3, 1, 1), (3, 7));
        assert_eq!(torus_knot_action(5, 4, 0), (5, 4));

        // Word level: ρ_m of (s_1⋯s_{a−1})^b expands to (s_1⋯s_{a−1})^{b'}.
        for (a, b, m) in [(2u64, 3u64, 1u64), (3, 1, 1), (3, 2, 2), (4, 3, 1), (2, 1, 4)] {
            let knot = BraidWord::torus_word(a as usize, b);
            let image = rho_endo(&knot, m as i64);
            let (_, b_new) = torus_knot_action(a, b, m);
            let expected = BraidWord::torus_word(a as usize, b_new);
            assert_eq!(
                image.expanded_letters(),
                expected.expanded_letters(),
                "(a, b, m) = ({a}, {b}, {m})"
            );
            // The twist exponent itself is m·b(a−1), the writhe cost.
            assert_eq!(image.center_exp(), (m * b * (a - 1)) as i64);
        }
    }

    #[test]
    fn stabilization_shifts_the_twist_exponent() {
        // Including γ ∈ B_N into B_{N+1} and appending s_N raises the
        // writhe by one, so the twist endomorphism picks up exactly one
        // extra full-twist factor per unit m relative to the unstabilized
        // word: center(ρ_m(γ·s_N)) = m·ℓ(γ) + m.
        let mut rng = StdRng::seed_from_u64(605);
        for _ in 0..100 {
            let strands = rng.gen_range(2..=5);
            let gamma = {
                // Letter-only words so the inclusion is verbatim.
                let mut g = random_word(&mut rng, strands, 12);
                g = BraidWord::new(strands, g.letters().to_vec(), 0);
                g
            };
            let mut stabilized_letters = gamma.letters().to_vec();
            stabilized_letters.push(strands as i32);
            let stabilized = BraidWord::new(strands + 1, stabilized_letters, 0);
            let m = rng.gen_range(-4..=4i64);
            assert_eq!(
                rho_endo(&stabilized, m).center_exp(),
                m * gamma.writhe() + m
            );
        }
    }

    #[test]
    fn parsing_and_display_round_trip() {
        let parsed = parse_word(3, "s1 s2^-1 s1").unwrap();
        assert_eq!(parsed.letters(), &[1, -2, 1]);
        assert_eq!(parsed.to_string(), "s1 s2^-1 s1");
        assert_eq!(BraidWord::identity(2).to_string(), "e");
        assert_eq!(BraidWord::new(2, vec![1], 3).to_string(), "s1 T^3");

        for bad in ["s0", "s3", "x1", "s1^2"] {
            assert!(
                matches!(parse_word(3, bad), Err(Error::Parse(_))),
                "token `{bad}` should be rejected"
            );
        }
        // Whitespace-only input is the identity word.
        assert!(parse_word(4, "  ").unwrap().letters().is_empty());
    }
}
