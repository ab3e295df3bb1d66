//! Experiment runner for the `irsloc-core` simulator: JSON configuration,
//! parallel Monte Carlo and grid search, CSV/JSON output, the gradient
//! checker and the command implementations behind the `irsloc` binary.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub mod commands;
pub mod config;
pub mod gradcheck;
pub mod output;
pub mod parallel;

pub use config::ExperimentConfig;
pub use parallel::Execution;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] irsloc_core::Error),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("unknown scheme {0:?} (expected joint, phase-only, position-only, baseline or a..d)")]
    UnknownScheme(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}
