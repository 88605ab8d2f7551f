use std::path::PathBuf;

use thiserror::Error;

/// Harness failures, each mapped onto one process exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_IO: i32 = 3;

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => EXIT_IO,
            HarnessError::Validation(_) => EXIT_FAIL,
            HarnessError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<kramers_core::Error> for HarnessError {
    fn from(e: kramers_core::Error) -> Self {
        use kramers_core::Error as E;
        match e {
            E::InvalidParameter { .. } => HarnessError::Config(e.to_string()),
            E::Domain(_) => HarnessError::Validation(e.to_string()),
            E::Numerical(_) => HarnessError::Numerical(e.to_string()),
        }
    }
}
