//! Command-line front end and persistence layer for `stagate-core`:
//! experiment configs, subcommand dispatch and file output with a hashed
//! run manifest.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{execute, RunReport};
pub use config::{config_from_document, override_value, parse_config, parse_document, ExperimentConfig};
pub use error::CliError;
