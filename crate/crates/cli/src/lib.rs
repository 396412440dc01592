//! Command-line front end for the channel-state coding toolkit: spec parsing,
//! run configs, parallel orchestration and deterministic CSV/JSON artifacts.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod specs;

use std::ffi::OsString;

use clap::Parser;

pub use commands::{execute, Report};
pub use config::{resolve, Resolved};
pub use error::CliError;

/// Reads `CSC_DIM_CAP` into the core dimension cap.
pub fn apply_dim_cap_env() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("CSC_DIM_CAP") {
        let cap: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|c| *c > 0)
            .ok_or_else(|| CliError::config(format!("CSC_DIM_CAP must be a positive integer, got `{v}`")))?;
        csc_core::linalg::set_dim_cap(cap);
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Result<Report, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = args::Cli::try_parse_from(args).map_err(|e| CliError::config(e.to_string()))?;
    execute(&resolve(&cli)?)
}
