//! Front end for `homoclinic`: configuration, commands, and table I/O.

pub mod commands;
pub mod config;
pub mod table;

use homoclinic::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Hypothesis(String),
    #[error("{0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 1 for a failed hypothesis, 2 for bad input, 3 for a numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Hypothesis(_) => 1,
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Domain { .. } | Error::Construction(_) | Error::Unsupported(_) => CliError::Usage(msg),
            Error::NotHyperbolic(_) | Error::NoLoop { .. } | Error::InconsistentV1 { .. } | Error::NoRealSlope { .. } => {
                CliError::Hypothesis(msg)
            }
            Error::BlowUp { .. } | Error::Integration { .. } => CliError::Numerical(msg),
        }
    }
}
