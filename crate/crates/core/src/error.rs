use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A malformed input row. `row` is 1-based and counts data rows only
    /// (the header is row 0).
    #[error("{context}: row {row}: {message}")]
    Parse {
        context: String,
        row: usize,
        message: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unsupported bundle format version {found} (this build reads version {supported})")]
    Version { found: u64, supported: u64 },

    #[error("bundle integrity: {0}")]
    Integrity(String),

    #[error("undefined rate: {0}")]
    UndefinedRate(String),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
