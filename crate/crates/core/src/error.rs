use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("label ({0}, {1}) out of range")]
    LabelOutOfRange(usize, usize),

    #[error("algebra failed validation: {0}")]
    Unvalidated(String),

    #[error("dilation factor must be positive")]
    NonPositiveDilation,

    #[error("empty sequence")]
    EmptySequence,

    #[error("level {level} exceeds step {step}")]
    LevelOutOfRange { level: usize, step: usize },

    #[error("no oracle: {0}")]
    NoOracle(String),

    #[error("resource budget exceeded: {stored} stored monomials > cap {cap}")]
    ResourceExhausted { stored: usize, cap: usize },

    #[error("invariance violated; cannot decompose: {0}")]
    InvarianceViolation(String),

    #[error("measure is not centered: level-1 mean {0:?}")]
    NotCentered(Vec<f64>),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("matched-measure solve failed (residual {residual:e}): {reason}")]
    SolverFailure { residual: f64, reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
