use std::io;

use thiserror::Error;

/// Harness failures, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Validation(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Verification(_) => 2,
            Self::Io(_) => 3,
        }
    }
}

impl From<twopt_core::Error> for HarnessError {
    fn from(e: twopt_core::Error) -> Self {
        match e {
            twopt_core::Error::Io(e) => Self::Io(e),
            other => Self::Validation(other.to_string()),
        }
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(e) => Self::Io(e),
                _ => unreachable!(),
            }
        } else {
            Self::Validation(e.to_string())
        }
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Self::Io(io::Error::other(e))
        } else {
            Self::Validation(e.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn validation(msg: impl Into<String>) -> HarnessError {
    HarnessError::Validation(msg.into())
}
