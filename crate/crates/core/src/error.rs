use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("effective sample size k = {k} out of range for n = {n} (need 1 <= k <= n - 1)")]
    KOutOfRange { k: usize, n: usize },

    #[error("nonpositive value {value} encountered where strictly positive data is required")]
    NonPositiveValue { value: f64 },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("probability {p} outside the admissible range {range}")]
    ProbabilityOutOfRange { p: f64, range: String },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("degenerate design: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for failures caused by the numbers rather than by the input shape
    /// (singular matrices, degenerate weight problems).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NotPositiveDefinite | Error::Degenerate(_))
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
