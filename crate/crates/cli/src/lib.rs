//! Configuration, experiment drivers and artifact emission behind the
//! `dnlslab` binary.

pub mod config;
pub mod experiments;
pub mod report;
pub mod sweep;

use std::path::PathBuf;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::run_experiment;
pub use report::{emit_report, RunArtifact};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Runtime(String),

    #[error(transparent)]
    Core(#[from] dnlslab_core::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for anything that went wrong while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}
