//! File formats, configuration and subcommands of the `reclogit` tool.
//!
//! Networks and trajectories are CSV, parameters, configurations, reports
//! and run manifests are JSON. The numerical work happens in
//! `reclogit-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod toy;

pub use error::{CliError, Result, EXIT_INPUT, EXIT_NUMERIC};
