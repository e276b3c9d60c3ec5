//! Experiment runner for finite-time qubit state preparation.
//!
//! Wraps the `qfts-core` simulation and analysis routines with
//! configuration handling, CSV and report output, and a verification suite.

pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod verify;

pub use config::{parse_config, ExperimentConfig, InitialState, Preset, Representation, RunArgs};
pub use error::{ConfigError, RunError, EXIT_IO, EXIT_NUMERIC, EXIT_VALIDATION};
pub use experiment::{run_experiment, simulate_config, RunSummary};
pub use output::{write_csv, Report, CSV_HEADER};
pub use verify::{run_verification_suite, VerifyOptions, VerifyReport};
