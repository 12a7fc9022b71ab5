use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("cannot parse configuration: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] gspa_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("plotting failed: {0}")]
    Plot(String),

    #[error("check failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    /// 1 for validation and I/O problems, 2 for mathematical guards,
    /// 3 when a check command finds a violation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_math_guard() => 2,
            CliError::CheckFailed(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}
