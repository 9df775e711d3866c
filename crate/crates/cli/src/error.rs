use thiserror::Error;

/// Failure of a command, mapped onto the exit-code contract.
#[derive(Debug, Error)]
pub enum CliError {
    /// Usage, configuration or input-data problem (exit 2).
    #[error("{0}")]
    Config(String),
    /// A numeric routine failed (exit 3).
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Prefixes the message with the command that failed.
    pub fn context(self, command: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{command}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{command}: {m}")),
        }
    }
}

impl From<fdpu_core::Error> for CliError {
    fn from(e: fdpu_core::Error) -> Self {
        if e.is_numeric() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
