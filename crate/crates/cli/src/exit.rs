use std::fmt;
use std::process::ExitCode;

use lrd_changepoint::Error;

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Flag = 2,
    Input = 3,
    MissingTable = 4,
    Numeric = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn new(status: Status, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    pub fn flag(message: impl Into<String>) -> Self {
        Self::new(Status::Flag, message)
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self::new(Status::Input, message)
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.status as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidLength(_) | Error::InvalidParameter(_) | Error::UnsupportedOrder(_) => Status::Flag,
            Error::Parse(_) | Error::Io(_) => Status::Input,
            Error::MissingQuantile(_) => Status::MissingTable,
            Error::EmbeddingNotPsd { .. }
            | Error::QuadratureNonConvergence(_)
            | Error::InconsistentNormalization(_) => Status::Numeric,
        };
        Self::new(status, e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
