use std::path::PathBuf;

use spin7_core::Spin7Error;
use thiserror::Error;

/// Failure classes of the command-line driver, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A check ran and failed (exit 1).
    #[error("verification failed: {0}")]
    Verification(String),

    /// Unusable configuration or input files (exit 2).
    #[error("configuration error: {0}")]
    Config(String),

    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("checkpoint {path}: {reason}")]
    Checkpoint { path: PathBuf, reason: String },

    /// The engine aborted or an output could not be written (exit 3).
    #[error("runtime abort: {0}")]
    Runtime(String),

    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Config(_) | CliError::Read { .. } | CliError::Checkpoint { .. } => 2,
            CliError::Runtime(_) | CliError::Write { .. } => 3,
        }
    }

    /// Classify an engine error raised while validating inputs.
    pub fn from_input(e: Spin7Error) -> Self {
        match e {
            Spin7Error::NonFinite { .. } | Spin7Error::Observer(_) => CliError::Runtime(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    /// Classify an engine error raised while running.
    pub fn from_run(e: Spin7Error) -> Self {
        match e {
            Spin7Error::InvalidParameter(_) | Spin7Error::InvalidLattice(_) | Spin7Error::Inadmissible(_) => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
