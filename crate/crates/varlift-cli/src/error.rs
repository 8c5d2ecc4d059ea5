//! CLI error type and the exit-code contract:
//! 0 pass, 1 checked-and-failed or diverged, 2 usage/config/parse errors.

use varlift_core::Error as CoreError;

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    MissingField(String),
    Usage(String),
    Io(std::io::Error),
    Json(serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Json(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::MissingField(name) => write!(f, "config is missing field `{name}`"),
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
            CliError::Json(e) => write!(f, "config error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(
                CoreError::NonConvergence { .. }
                | CoreError::NotStabilizable { .. }
                | CoreError::NonFinite { .. }
                | CoreError::BaseMismatch { .. },
            ) => 1,
            _ => 2,
        }
    }
}
