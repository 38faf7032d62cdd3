//! Scenario files and subcommand drivers behind the `qtunnel` binary.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::Output;
pub use config::{Overrides, ScenarioConfig};
pub use error::CliError;
