use std::path::Path;

use thiserror::Error;

use crate::config::ConfigErrors;

/// Process exit code for a bad config.
pub const EXIT_CONFIG: i32 = 2;
/// Process exit code for a failure while running.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error:\n{0}")]
    Config(#[from] ConfigErrors),
    #[error("{context}: {source}")]
    Model {
        context: String,
        #[source]
        source: d2d_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("no data in {0}")]
    NoData(String),
    #[error("{0}")]
    Runtime(String),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io { path: path.display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => EXIT_CONFIG,
            _ => EXIT_RUNTIME,
        }
    }
}

/// Attach experiment context to a core error.
pub trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, LabError>;
}

impl<T> Context<T> for d2d_core::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T, LabError> {
        self.map_err(|source| LabError::Model { context: what(), source })
    }
}
