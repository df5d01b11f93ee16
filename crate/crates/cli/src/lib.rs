//! Command-line front end for the tensornet library: JSON-configured
//! experiments, structured results and the acceptance suites.

pub mod config;
pub mod error;
pub mod run;
pub mod verify;

pub use config::{parse_config, parse_config_for, Command, ExperimentConfig, Format};
pub use error::CliError;
pub use run::{run, ResultRecord, RunOutput, Table};
