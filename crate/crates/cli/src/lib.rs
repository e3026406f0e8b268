//! Command-line front end for `unemp`: configuration, data files,
//! reports and plot scripts. The binary is a thin wrapper around [`cli::Cli`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod format;
pub mod plot;
pub mod report;

pub use error::{CliError, CliResult};
