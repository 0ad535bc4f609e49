//! Command-line front end: one subcommand per experiment, each writing a
//! JSON run record and CSV tables into the output directory.

pub mod commands;
pub mod error;
pub mod output;
pub mod record;

pub use commands::{execute, replay, Cli, Command};
pub use error::{CliError, CliResult};
pub use output::{Outcome, Table};
pub use record::{RunRecord, SCHEMA_VERSION};
