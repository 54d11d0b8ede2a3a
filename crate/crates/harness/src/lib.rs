//! Experiment layer for `rsma-uav`: configuration files, seeded scenarios,
//! budget sweeps, result export and the oracle validation suite.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
mod scenario;
pub mod validate;

pub use config::{load_config, parse_config};
pub use error::{HarnessError, Result};
pub use experiment::{config_hash, load_spec, parse_spec, run_experiment, run_grid, ExperimentReport, ExperimentSpec, RunOutcome, SweepVariable};
pub use scenario::generate_scenario;
