use thiserror::Error;

/// Errors produced anywhere in the workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid window: {0}")]
    InvalidWindow(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid too large: {cells} cells exceeds the limit of {limit}")]
    GridTooLarge { cells: u128, limit: u128 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("too many empty replications: {empty} of {total}")]
    TooManyEmpty { empty: usize, total: usize },

    #[error("numeric overflow: {0}")]
    Overflow(String),

    #[error("non-integrable response: {0}")]
    NonIntegrable(String),

    #[error("intensity mismatch: {a} vs {b} differ by more than 1%")]
    IntensityMismatch { a: f64, b: f64 },

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
