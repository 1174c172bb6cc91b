use std::process::ExitCode;

use nsv4_core::Error;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("cannot write output: {0}")]
    Output(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) | CliError::Output(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
            CliError::Invariant(_) => ExitCode::from(4),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::BlowUp { .. } | Error::RankDeficient { .. } | Error::NotSolenoidal { .. } | Error::NonzeroMean(_) => {
                CliError::Numerical(msg)
            }
            Error::NotOrthonormal(_) | Error::InvariantViolation(_) => CliError::Invariant(msg),
            Error::InvalidGrid(_)
            | Error::GridMismatch { .. }
            | Error::InvalidParameter(_)
            | Error::Unsupported(_)
            | Error::Format(_)
            | Error::Io(_)
            | Error::Json(_) => CliError::Config(msg),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(std::io::Error::other(e))
    }
}
