//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the library. Every computational entry point that can
/// fail on user input returns `Result<_, LieflowError>`; programmer errors
/// (dimension mixups between internal calls) panic instead.
#[derive(Debug, Clone, Error)]
pub enum LieflowError {
    #[error("group mismatch: {left} vs {right}")]
    GroupMismatch { left: String, right: String },

    #[error("element outside chart: |x(g)| = {norm:.6e} >= radius {radius:.6e}")]
    OutOfChart { norm: f64, radius: f64 },

    #[error("non-finite coordinate in input")]
    NonFinite,

    #[error("invalid chart radius {radius:.6e} (must lie in (0, pi))")]
    InvalidChart { radius: f64 },

    #[error("Levy measure atom within {dist:.3e} of the identity (atoms must avoid e)")]
    AtomAtIdentity { dist: f64 },

    #[error("Levy measure has non-finite effective jump mass")]
    InfiniteJumpMass,

    #[error("invalid small-jump density: {reason}")]
    InvalidDensity { reason: String },

    #[error("operation requires constant characteristics; field `{field}` varies over the group")]
    NonConstantCharacteristics { field: String },

    #[error("invalid characteristics: {reason}")]
    InvalidCharacteristics { reason: String },

    #[error("semigroup time must be nonnegative, got {t:.6e}")]
    NegativeTime { t: f64 },

    #[error("coefficient weight {label:?} not covered by the symbol (max norm {max_norm})")]
    MissingWeight { label: Vec<i64>, max_norm: f64 },

    #[error("quadrature resolution {resolution} below the exactness threshold {required}")]
    ResolutionTooLow { resolution: usize, required: usize },

    #[error("jump-support separation violated: {reason}")]
    SeparationViolated { reason: String },

    #[error("invalid test function: {reason}")]
    InvalidTestFunction { reason: String },

    #[error("evaluation point not on the symbol's sample grid")]
    PointNotOnGrid,
}

pub type Result<T> = std::result::Result<T, LieflowError>;
