use thiserror::Error;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad arguments, configuration or unreadable inputs.
    #[error("{0}")]
    Usage(String),

    /// The release fails the size or defect-ratio filter.
    #[error("invalid release {release}: {verdict}")]
    InvalidRelease { release: String, verdict: String },

    /// The experiment ran but some configurations failed.
    #[error("{failed} of {total} configurations failed")]
    Partial { failed: usize, total: usize },

    #[error(transparent)]
    Core(#[from] content_defect::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 1,
            CliError::InvalidRelease { .. } => 2,
            CliError::Partial { .. } => 3,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}
