use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("not a bijection of {{1..{0}}}")]
    NotABijection(usize),

    #[error("{what} = {value} exceeds the cap {cap} (raise it explicitly with --unsafe-caps)")]
    CapExceeded {
        what: &'static str,
        value: u128,
        cap: u128,
    },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid leg: {0}")]
    InvalidLeg(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("trace deviates from 1 by {0:e}")]
    TraceDeviation(f64),

    #[error("negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("bound violation: {0}")]
    BoundViolation(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
