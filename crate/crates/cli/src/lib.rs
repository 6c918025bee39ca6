//! Batch front end for kerrcat: scenario files, validation suites, sweeps.

pub mod commands;
pub mod scenario;
pub mod table;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("{0}")]
    Physics(kerrcat::Error),
    #[error("validation failed")]
    ValidationFailed,
}

impl From<kerrcat::Error> for CliError {
    fn from(e: kerrcat::Error) -> Self {
        use kerrcat::Error as E;
        match e {
            E::InvalidAxis(_) => CliError::Usage(e.to_string()),
            E::InvalidParameter { .. } | E::InvalidCounts { .. } => CliError::Parse(e.to_string()),
            other => CliError::Physics(other),
        }
    }
}

impl CliError {
    /// 1 validation failure, 2 usage/parse/io, 3 physical precondition.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ValidationFailed => 1,
            CliError::Usage(_) | CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Physics(_) => 3,
        }
    }
}
