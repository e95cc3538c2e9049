//! CLI error type and the exit-code mapping: 0 success, 2 invalid input,
//! 3 numeric failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Validation(tridrop::Error),

    #[error(transparent)]
    Numeric(tridrop::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidConfig(_) | CliError::Io(_) | CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl From<tridrop::Error> for CliError {
    fn from(e: tridrop::Error) -> Self {
        use tridrop::Error::*;
        match e {
            ConvergenceFailure { .. } | InvalidQuadrature { .. } => CliError::Numeric(e),
            _ => CliError::Validation(e),
        }
    }
}
