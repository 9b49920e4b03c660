use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config field {field}: {constraint}")]
    Config { field: String, constraint: String },

    #[error("ingestion error at row {row}, column {column}: {reason}")]
    Ingest {
        row: usize,
        column: String,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] abscop_core::Error),

    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    /// Exit code contract: configuration and ingestion problems are 2,
    /// everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config { .. } | HarnessError::Ingest { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
