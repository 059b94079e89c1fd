pub mod config;
pub mod pipeline;
pub mod plot;
pub mod run;
pub mod slice;

pub use config::{LabConfig, Mode};
pub use run::{Manifest, RunDir, Stage, StageOutcome, StageRecord, StageStatus};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{stage}: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("missing artifact {path}")]
    MissingArtifact { path: std::path::PathBuf },
    #[error("run directory {path} is locked by another process")]
    Locked { path: std::path::PathBuf },
    #[error("io error at {path}: {source}")]
    Io { path: std::path::PathBuf, source: std::io::Error },
}

impl LabError {
    /// Process exit code: 3 for configuration errors, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 3,
            _ => 2,
        }
    }
}
