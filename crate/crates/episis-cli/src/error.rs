//! Error-to-exit-code mapping: 0 success, 1 validation, 2 I/O,
//! 3 verification failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Io(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
            CliError::Verification(_) => 3,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<episis::graph::GraphError> for CliError {
    fn from(e: episis::graph::GraphError) -> Self {
        match e {
            episis::graph::GraphError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<episis::dynamics::DynamicsError> for CliError {
    fn from(e: episis::dynamics::DynamicsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<episis::mfa::MfaError> for CliError {
    fn from(e: episis::mfa::MfaError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<episis::coupling::CouplingError> for CliError {
    fn from(e: episis::coupling::CouplingError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<episis::metrics::MetricError> for CliError {
    fn from(e: episis::metrics::MetricError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Validation(format!("config: {e}"))
    }
}
