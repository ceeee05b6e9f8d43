//! Exact computer algebra and statistical-mechanics numerics for the
//! arithmetic of roots of unity.
//!
//! The crate has three layers:
//!
//! * **Exact algebra** — cyclotomic integers `Z[ζ_m]` ([`cyclotomic`]),
//!   finite-level Habiro-ring arithmetic with evaluation and Taylor maps at
//!   roots of unity ([`habiro`]), the Bost–Connes crossed product over the
//!   `Q/Z` group ring ([`bc_core`]), its multivariable analogue with
//!   `M_n(Z)^+` acting through Hermite/Smith normal forms ([`multivar`]),
//!   big Witt vectors and Λ-ring Frobenius lifts ([`witt_lambda`]), and a
//!   braid-word calculus with center-exponent normal form ([`braids`]).
//!   Everything in this layer is computed over arbitrary-precision integers
//!   and rationals; equality assertions are exact.
//! * **Numerics** — partition functions, Gibbs/KMS states, and
//!   zero-temperature limits of the associated quantum statistical systems
//!   ([`qsm`]), type II₁ determinant-weighted traces ([`multivar`]), and
//!   multiple zeta values of rational cones with quantum-channel transforms
//!   ([`mzv_channels`]). Floating-point results always carry explicit
//!   truncation-tail reports.
//! * **Reproduction** — the [`acceptance`] module packages the project's
//!   acceptance checks as callable reports so the test suite and the CLI
//!   `repro` subcommand run the identical code.
//!
//! Truncation discipline: infinite objects (projective limits, ℓ²-spaces,
//! semigroup sums) are always modelled at an explicit finite level that is
//! part of the data, and operations report validity sub-bases or tail bounds
//! rather than silently truncating.

pub mod acceptance;
pub mod arith;
pub mod bc_core;
pub mod braids;
pub mod cyclotomic;
pub mod error;
pub mod habiro;
pub mod multivar;
pub mod mzv_channels;
pub mod numerics;
pub mod poly;
pub mod qsm;
pub mod witt_lambda;

mod zlin;

pub use error::Error;
pub use poly::IntPoly;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
