//! Experiment runner for `condensa-core`: JSON configs, CSV/JSON artifacts,
//! replica-parallel Monte Carlo and the built-in verification suite.

pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{ExperimentConfig, Kind, Level, DEFAULT_SEED, SCHEMA_VERSION};
pub use error::{CliError, Result};
pub use report::{Check, RunReport};
pub use runner::{execute, run};
