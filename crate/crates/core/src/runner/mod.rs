//! Experiment orchestration: configuration, seeded substreams, convergence
//! tables and the built-in fixtures.

pub mod config;
pub mod experiment;
pub mod fixtures;

pub use config::{parse_config, DegreeEstimator, ExperimentConfig, MRule, Regime};
pub use experiment::{run_experiment, substream, ConvergenceRow, ExperimentOutcome, SizeResult};
