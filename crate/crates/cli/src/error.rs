use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] toxgate_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Mismatch(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub const USAGE: u8 = 2;
    pub const MISMATCH: u8 = 3;
    pub const INTERNAL: u8 = 4;

    pub fn exit_code(&self) -> u8 {
        use toxgate_core::Error as E;
        match self {
            CliError::Usage(_) => Self::USAGE,
            CliError::Mismatch(_) => Self::MISMATCH,
            CliError::Internal(_) => Self::INTERNAL,
            CliError::Core(e) => match e {
                E::Integrity(_) | E::Version { .. } | E::DimensionMismatch { .. } => Self::MISMATCH,
                E::Io { .. }
                | E::Parse { .. }
                | E::InvalidInput(_)
                | E::UndefinedRate(_)
                | E::DegenerateDistribution(_) => Self::USAGE,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
