use thiserror::Error;

/// Errors raised by the solver and verification harness.
#[derive(Debug, Error)]
pub enum KsError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid resolution: {0}")]
    InvalidResolution(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid mode index {0:?}: every wavenumber must be >= 1")]
    InvalidMode(Vec<usize>),

    #[error("axis {axis} out of range for dimension {n}")]
    InvalidAxis { axis: usize, n: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("geometric condition fails (theta = {theta}); smallness margin is undefined")]
    GeometricConditionFails { theta: f64 },

    #[error("incompatible discretizations: {0}")]
    Incompatible(String),

    #[error("too few eligible records: need {needed}, have {have}")]
    TooFewRecords { needed: usize, have: usize },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, KsError>;
