use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by simulation, estimation, and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: T = {horizon}, N = {steps}")]
    InvalidGrid { horizon: f64, steps: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("empty path batch")]
    EmptyBatch,

    #[error("time grid mismatch between trajectory and drift field")]
    GridMismatch,

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("missing artifact {path}: {hint}")]
    MissingArtifact { path: PathBuf, hint: &'static str },

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Process exit code for the CLI: 1 config, 2 numeric/runtime, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_) => 1,
            Error::Io(_) => 3,
            Error::MissingArtifact { .. } => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
