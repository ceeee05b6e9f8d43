//! Crate-wide error type.
//!
//! Domain errors are part of each operation's contract (e.g. `eta_n` returns
//! [`Error::NotInRange`] as a *certificate* that no preimage exists, not as a
//! failure). All variants carry enough data to reconstruct the violated
//! precondition.

use thiserror::Error;

/// Errors produced by the exact-algebra and numerics layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An integer was required to be a unit modulo `m` (gcd(a, m) = 1).
    #[error("{a} is not a unit modulo {m}")]
    NotAUnit { a: i64, m: u64 },

    /// Certified non-membership in the range of the endomorphism `σ_n` at the
    /// given level: the integer linear system for a preimage has no solution.
    #[error("element is not in the range of sigma_{n} at level {level}")]
    NotInRange { n: u64, level: u32 },

    /// Evaluation at a root of unity whose order exceeds the element's level,
    /// so `(q - ζ)` does not divide the level ideal generator.
    #[error("root order {order} exceeds level {level}")]
    OrderExceedsLevel { order: u64, level: u32 },

    /// Taylor expansion depth `i` violates `i·order(ζ) < level`.
    #[error("taylor depth {depth} times root order {order} is not below level {level}")]
    OrderTimesDepthExceedsLevel { order: u64, depth: u32, level: u32 },

    /// A group-ring label has a denominator that does not divide the finite
    /// level at which a profinite unit is being modelled.
    #[error("support denominator {denominator} does not divide level {level}")]
    DenominatorMismatch { denominator: u64, level: u64 },

    /// The integral model requires integer coefficients.
    #[error("input coefficients are not integral")]
    NonIntegralInput,

    /// A Witt-vector component that was required to be integral is not;
    /// `index` is the 1-based coordinate that failed.
    #[error("witt component u_{index} is not integral")]
    NonIntegral { index: usize },

    /// Inverse temperature outside the convergence region of the partition
    /// function (β must exceed `min`).
    #[error("beta = {beta} is outside the convergence range (must exceed {min})")]
    BetaOutOfRange { beta: f64, min: f64 },

    /// A nonsingular matrix was required.
    #[error("matrix is singular")]
    SingularMatrix,

    /// Binary Witt operations need equal truncation lengths.
    #[error("witt truncation mismatch: {left} vs {right}")]
    TruncationMismatch { left: usize, right: usize },

    /// Vector/matrix dimensions do not match the ambient dimension.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The height form used for cone enumeration is not strictly positive on
    /// the cone interior.
    #[error("height form is not strictly positive on the cone interior")]
    NonPositiveHeightForm,

    /// Cone zeta value requested with too few linear forms for the comparison
    /// bound Σ h^{n-1-k} to converge; can be overridden explicitly.
    #[error("convergence heuristic violated: {k} forms in dimension {n} (need k > n); pass the override to force evaluation")]
    ConvergenceWarning { k: usize, n: usize },

    /// The matrix does not map the cone's interior lattice points into
    /// themselves, so it induces no channel on this state.
    #[error("matrix does not preserve the cone")]
    ConeNotPreserved,

    /// Text input (polynomial, fraction, matrix, braid word) failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable kind name, used by the CLI JSON error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotAUnit { .. } => "NotAUnit",
            Error::NotInRange { .. } => "NotInRange",
            Error::OrderExceedsLevel { .. } => "OrderExceedsLevel",
            Error::OrderTimesDepthExceedsLevel { .. } => "OrderTimesDepthExceedsLevel",
            Error::DenominatorMismatch { .. } => "DenominatorMismatch",
            Error::NonIntegralInput => "NonIntegralInput",
            Error::NonIntegral { .. } => "NonIntegral",
            Error::BetaOutOfRange { .. } => "BetaOutOfRange",
            Error::SingularMatrix => "SingularMatrix",
            Error::TruncationMismatch { .. } => "TruncationMismatch",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonPositiveHeightForm => "NonPositiveHeightForm",
            Error::ConvergenceWarning { .. } => "ConvergenceWarning",
            Error::ConeNotPreserved => "ConeNotPreserved",
            Error::Parse(_) => "Parse",
        }
    }
}
