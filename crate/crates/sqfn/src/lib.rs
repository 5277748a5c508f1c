//! Command-line laboratory around `sqfn-core`: file formats, scenario
//! files, report emission, a rayon executor and the `sqfn` binary's
//! argument handling.

pub mod cli;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
pub use exec::Pool;
