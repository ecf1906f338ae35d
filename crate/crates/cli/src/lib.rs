//! Config-driven experiment runner for `witten-lab`.

pub mod config;
pub mod run;

pub use config::{CheckName, ConfigError, ExperimentConfig};
pub use run::{run_experiment, Command, RunError, RunOptions, RunReport};
