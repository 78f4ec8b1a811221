//! Library side of the `stereoboot` command-line tool: CSV ingestion, run
//! configuration and the subcommands.

pub mod commands;
pub mod config;
mod error;
pub mod ingest;
pub mod output;

pub use commands::{run, run_with_threads};
pub use config::{CommandName, RunConfig};
pub use error::{CliError, CliResult};
