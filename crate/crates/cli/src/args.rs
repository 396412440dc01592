//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{InfoQuantity, PrepChoice};

#[derive(Debug, Parser)]
#[command(name = "csc", version, about = "Channel-state coding capacity toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Flags shared by every subcommand; they override the `--config` file.
#[derive(Debug, Default, Clone, Args)]
pub struct CommonArgs {
    /// JSON run config.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Channel spec, e.g. `erasure:p=0.25` or `kraus-file:<path>`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub channel: Option<String>,
    /// State spec, e.g. `bell`, `isotropic:F=0.8`, `file:<path>`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub state: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub restarts: Option<usize>,
    /// Objective evaluations per restart.
    #[arg(long, global = true)]
    pub max_evals: Option<usize>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=2))]
    pub block_level: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Monte-Carlo trials per grid point.
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<usize>,
    /// Grid as `key=v1,v2;key=...`: sweep takes `n` and `rate`, decouple `n` and
    /// `log_s`, superact `channels` and `states` separated by `|`.
    #[arg(long, global = true, value_name = "SPEC")]
    pub grid: Option<String>,
    /// Preparation used by sweep and decouple.
    #[arg(long, global = true, value_enum)]
    pub prep: Option<PrepChoice>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CommandArgs {
    /// Joint one-shot (or blocked) capacity estimate.
    Capacity,
    /// Joint strategy against separate channel coding plus distillation.
    Compare,
    /// Decoupling error over an `(n, rate)` grid.
    Sweep,
    /// Individual protocol trials with the Uhlmann decoder.
    Decouple,
    /// Joint-vs-separate gaps over channels x states.
    Superact,
    /// Entropic quantities of a state.
    Info {
        #[arg(value_enum)]
        quantity: InfoQuantity,
        /// Labels of the first group (default: the first system).
        #[arg(long, value_delimiter = ',')]
        a: Option<Vec<String>>,
        /// Labels of the second group (default: the remaining systems).
        #[arg(long, value_delimiter = ',')]
        b: Option<Vec<String>>,
    },
    /// Run the command named in the config file.
    Run,
}
