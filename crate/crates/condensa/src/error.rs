use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// A config value is malformed; `path` is the dotted field path.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: condensa_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Threads(String),
    #[error("subcommand `{command}` does not match config kind `{kind}`")]
    KindMismatch { command: String, kind: String },
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Attaches a short description of what was being done to a core error.
pub trait Context<T> {
    fn context(self, what: &str) -> Result<T>;
}

impl<T> Context<T> for condensa_core::Result<T> {
    fn context(self, what: &str) -> Result<T> {
        self.map_err(|source| CliError::Core { context: what.to_string(), source })
    }
}
