//! Command-line harness: configuration, dispatch to the model code, report
//! and artifact writing, and the acceptance criteria behind `verify`.

use std::path::{Path, PathBuf};

pub mod checks;
pub mod commands;
pub mod config;
pub mod emit;
pub mod report;

pub use commands::run;
pub use config::{Format, RunConfig};
pub use report::{Check, Measurement, RunReport, Threshold};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] critlab::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    /// 2 for bad invocations (including out-of-range parameters), 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Model(critlab::Error::InvalidParameter(_)) => 2,
            _ => 1,
        }
    }
}
