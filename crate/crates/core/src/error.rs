use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library.
///
/// The variants split into two families: precondition failures (bad input,
/// unsupported dimension, unknown body kind) and numerical guards that trip
/// when a body touches the boundary of the unit ball, where the hyperbolic
/// density is singular. [`Error::is_numerical_guard`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unknown body kind `{kind}` (valid kinds: {valid})")]
    UnknownBodyKind { kind: String, valid: String },

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("body `{label}` is not contained in the open unit ball: radial {radial} at direction {direction:?}")]
    Containment {
        label: String,
        radial: f64,
        direction: Vec<f64>,
    },

    #[error("singular hyperbolic kernel: radial {radial} >= {limit} at direction {direction:?}")]
    Singularity {
        radial: f64,
        limit: f64,
        direction: Vec<f64>,
    },

    #[error("claimed R_theta-invariance violated for `{label}`: deviation {deviation:e}")]
    InvarianceViolation { label: String, deviation: f64 },
}

impl Error {
    /// True for containment and singularity guards.
    pub fn is_numerical_guard(&self) -> bool {
        matches!(self, Error::Containment { .. } | Error::Singularity { .. })
    }
}
