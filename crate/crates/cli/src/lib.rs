//! Experiment harness: corpus generation, training, greedy evaluation and
//! arm comparison, driven by a TOML config.

pub mod commands;
pub mod compare;
pub mod config;
pub mod corpus;
pub mod experiment;
pub mod report;

use std::path::{Path, PathBuf};

pub use config::{Arm, ExperimentConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const IO: i32 = 3;
    pub const DIVERGENCE: i32 = 4;
    pub const LAYOUT: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("training diverged (NaN loss) in episode {episode} of {run}")]
    Divergence { run: String, episode: usize },
    #[error("layout mismatch: checkpoint expects {expected} inputs, arm {arm} produces {got}")]
    LayoutMismatch { arm: String, expected: usize, got: usize },
    #[error("no report tagged base for variant {0}")]
    MissingBase(String),
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingBase(_) => exit::CONFIG,
            CliError::Io { .. } | CliError::Run(_) => exit::IO,
            CliError::Divergence { .. } => exit::DIVERGENCE,
            CliError::LayoutMismatch { .. } => exit::LAYOUT,
        }
    }

    pub fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Io { path: path.to_path_buf(), message: e.to_string() }
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}
