//! Command-line front end for running DRBO experiment suites.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_list, cmd_run, cmd_verify, RunOptions};
