//! Command-line front end: matrix and manifest input, library calls,
//! deterministic JSON reports.

pub mod args;
pub mod commands;
pub mod error;
pub mod manifest;
pub mod matrix_io;
pub mod report;

pub use args::Cli;
pub use commands::{run, Outcome};
pub use error::{exit, CliError};
