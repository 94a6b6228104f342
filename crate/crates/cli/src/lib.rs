//! Library surface of the `dressedlat` command-line tool, exposed so the
//! integration tests can drive runs in-process.

pub mod config;
pub mod error;
pub mod quantity;
pub mod runner;
pub mod svg;

pub use error::{CliError, Result};
pub use runner::{run, RunOutcome, Subcommand};
