use std::path::PathBuf;

use thiserror::Error;

/// Failures of the harness. [`BenchError::exit_code`] maps them onto the CLI contract.
#[derive(Error, Debug)]
pub enum BenchError {
    #[error("{0}")]
    Config(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] illposed_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    pub fn config(msg: impl Into<String>) -> Self {
        BenchError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for bad configuration or input, 3 for numeric failures, 4 for I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            BenchError::Config(_) | BenchError::Input { .. } => 2,
            BenchError::Core(e) if e.is_numeric() => 3,
            BenchError::Core(_) => 2,
            BenchError::Io { .. } => 4,
        }
    }

    pub fn category(&self) -> &'static str {
        match self.exit_code() {
            2 => "config",
            3 => "numeric",
            _ => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, BenchError>;
