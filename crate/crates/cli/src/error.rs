use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, bad config, unreadable or malformed input.
    #[error("{0}")]
    Usage(String),
    /// A verification check or golden comparison failed.
    #[error("{0}")]
    CheckFailed(String),
    #[error("numeric fault at step {step}: {detail}")]
    Numeric { step: usize, detail: String },
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::CheckFailed(_) => EXIT_CHECK_FAILED,
            CliError::Numeric { .. } => EXIT_NUMERIC,
        }
    }

    pub fn io(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{context}: {err}"))
    }
}

impl From<adamxlab_core::Error> for CliError {
    fn from(e: adamxlab_core::Error) -> Self {
        use adamxlab_core::Error as E;
        match e {
            E::NumericFault { step, detail } => CliError::Numeric { step, detail },
            E::GoldenMismatch { .. } | E::BoundUndefined { .. } => {
                CliError::CheckFailed(e.to_string())
            }
            E::Contract(_) | E::UnsupportedProblem(_) | E::InvalidHyperParam { .. } => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
