//! JSON run configs merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use csc_core::optimize::OptimizerConfig;
use serde::{Deserialize, Serialize};

use crate::args::{Cli, CommandArgs};
use crate::error::CliError;
use crate::specs::json_error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Capacity,
    Compare,
    Sweep,
    Decouple,
    Superact,
    Info,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Capacity => "capacity",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
            Command::Decouple => "decouple",
            Command::Superact => "superact",
            Command::Info => "info",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InfoQuantity {
    Entropy,
    Coherent,
    Mutual,
    Ppt,
}

/// Preparation for the decoupling simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PrepChoice {
    /// Maximally entangled `phi`, identity encoder.
    #[default]
    MaxEntangled,
    /// Argmax of the joint capacity search.
    Optimized,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_s: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfoConfig {
    pub quantity: InfoQuantity,
    #[serde(default)]
    pub a: Option<Vec<String>>,
    #[serde(default)]
    pub b: Option<Vec<String>>,
}

/// Contents of a `--config` file; every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub channel: Option<String>,
    pub state: Option<String>,
    pub seed: Option<u64>,
    pub optimizer: Option<OptimizerConfig>,
    pub block_level: Option<usize>,
    pub trials: Option<usize>,
    pub prep: Option<PrepChoice>,
    pub grid: GridConfig,
    pub info: Option<InfoConfig>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Fully resolved run; serialized into the manifest and hashed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub command: Command,
    pub channel: Option<String>,
    pub state: Option<String>,
    pub seed: u64,
    pub optimizer: OptimizerConfig,
    pub block_level: usize,
    pub trials: usize,
    pub prep: PrepChoice,
    pub grid: GridConfig,
    pub info: Option<InfoConfig>,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub jobs: Option<usize>,
}

pub const DEFAULT_OUT: &str = "csc-out";
const DEFAULT_TRIALS: usize = 100;

/// Where a value came from, for error messages.
struct Source<'a> {
    path: Option<&'a Path>,
    text: &'a str,
}

impl Source<'_> {
    fn err(&self, key: &str, flag: Option<&str>, msg: impl std::fmt::Display) -> CliError {
        if let Some(flag) = flag {
            return CliError::config(format!("{flag}: {msg}"));
        }
        let needle = format!("\"{key}\"");
        match (self.path, self.text.lines().position(|l| l.contains(&needle))) {
            (Some(p), Some(line)) => CliError::config(format!("{}:{}: {msg}", p.display(), line + 1)),
            (Some(p), None) => CliError::config(format!("{}: {msg}", p.display())),
            _ => CliError::config(msg.to_string()),
        }
    }
}

fn split_list<T: std::str::FromStr>(key: &str, body: &str, sep: char) -> Result<Vec<T>, CliError> {
    body.split(sep)
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::config(format!("--grid: cannot parse `{s}` in `{key}`")))
        })
        .collect()
}

/// Parses `--grid` for `command`.
pub fn parse_grid(command: Command, spec: &str) -> Result<GridConfig, CliError> {
    let mut g = GridConfig::default();
    for part in spec.split(';').filter(|s| !s.trim().is_empty()) {
        let (key, body) = part
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--grid: expected key=values, got `{part}`")))?;
        let key = key.trim();
        match (command, key) {
            (Command::Sweep | Command::Decouple, "n") => g.n = Some(split_list(key, body, ',')?),
            (Command::Sweep, "rate" | "rates") => g.rates = Some(split_list(key, body, ',')?),
            (Command::Decouple, "log_s" | "log_S") => g.log_s = Some(split_list(key, body, ',')?),
            (Command::Superact, "channel" | "channels") => g.channels = Some(split_list(key, body, '|')?),
            (Command::Superact, "state" | "states") => g.states = Some(split_list(key, body, '|')?),
            _ => {
                let expected = match command {
                    Command::Sweep => "n, rate",
                    Command::Decouple => "n, log_s",
                    Command::Superact => "channels, states",
                    _ => "nothing: this command takes no grid",
                };
                return Err(CliError::config(format!(
                    "--grid: unknown key `{key}` (expected {expected})"
                )));
            }
        }
    }
    Ok(g)
}

pub fn load_config(path: &Path) -> Result<(RunConfig, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config `{}`: {e}", path.display())))?;
    let cfg = serde_json::from_str(&text).map_err(|e| json_error(path, &e))?;
    Ok((cfg, text))
}

/// Merges flags over the config file and validates the result.
pub fn resolve(cli: &Cli) -> Result<Resolved, CliError> {
    let flags = &cli.common;
    let (file, text) = match &flags.config {
        Some(p) => load_config(p)?,
        None => (RunConfig::default(), String::new()),
    };
    let src = Source {
        path: flags.config.as_deref(),
        text: &text,
    };

    let (command, info_flags) = match &cli.command {
        CommandArgs::Capacity => (Command::Capacity, None),
        CommandArgs::Compare => (Command::Compare, None),
        CommandArgs::Sweep => (Command::Sweep, None),
        CommandArgs::Decouple => (Command::Decouple, None),
        CommandArgs::Superact => (Command::Superact, None),
        CommandArgs::Info { quantity, a, b } => (
            Command::Info,
            Some(InfoConfig {
                quantity: *quantity,
                a: a.clone(),
                b: b.clone(),
            }),
        ),
        CommandArgs::Run => {
            let c = file
                .command
                .ok_or_else(|| src.err("command", None, "`run` needs a config file with a \"command\" field"))?;
            (c, None)
        }
    };

    let seed = flags.seed.or(file.seed).or(file.optimizer.map(|o| o.seed)).unwrap_or(0);
    let mut optimizer = file.optimizer.unwrap_or_default();
    optimizer.seed = seed;
    if let Some(r) = flags.restarts {
        optimizer.restarts = r;
    }
    if let Some(m) = flags.max_evals {
        optimizer.max_evals = m;
    }
    if optimizer.restarts == 0 {
        return Err(src.err(
            "restarts",
            flags.restarts.map(|_| "--restarts"),
            "need at least one restart",
        ));
    }
    if optimizer.max_evals == 0 {
        return Err(src.err(
            "max_evals",
            flags.max_evals.map(|_| "--max-evals"),
            "need a positive evaluation budget",
        ));
    }
    if !(optimizer.tol.is_finite() && optimizer.tol >= 0.0) {
        return Err(src.err("tol", None, "tolerance must be a non-negative number"));
    }

    let block_level = flags.block_level.map(|b| b as usize).or(file.block_level).unwrap_or(1);
    if !(1..=2).contains(&block_level) {
        return Err(src.err(
            "block_level",
            None,
            format!("block level must be 1 or 2, got {block_level}"),
        ));
    }
    let trials = flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 && matches!(command, Command::Sweep | Command::Decouple) {
        return Err(src.err("trials", flags.trials.map(|_| "--trials"), "need at least one trial"));
    }
    if flags.jobs == Some(0) || (flags.jobs.is_none() && file.jobs == Some(0)) {
        return Err(src.err("jobs", flags.jobs.map(|_| "--jobs"), "need at least one worker"));
    }

    let uses_pair = matches!(
        command,
        Command::Capacity | Command::Compare | Command::Sweep | Command::Decouple
    );
    let channel = if uses_pair {
        let ch = flags.channel.clone().or(file.channel.clone());
        Some(ch.ok_or_else(|| CliError::config("no channel given (use --channel or \"channel\" in the config)"))?)
    } else {
        None
    };
    let state = match command {
        Command::Info => Some(
            flags
                .state
                .clone()
                .or(file.state.clone())
                .ok_or_else(|| CliError::config("no state given (use --state or \"state\" in the config)"))?,
        ),
        Command::Superact => None,
        _ => Some(
            flags
                .state
                .clone()
                .or(file.state.clone())
                .unwrap_or_else(|| "trivial".into()),
        ),
    };

    let flag_grid = match &flags.grid {
        Some(spec) => parse_grid(command, spec)?,
        None => GridConfig::default(),
    };
    let grid = resolve_grid(command, &flag_grid, &file.grid, &src)?;

    let info = match command {
        Command::Info => Some(
            info_flags
                .or(file.info.clone())
                .ok_or_else(|| src.err("info", None, "info needs a \"quantity\""))?,
        ),
        _ => None,
    };

    let out = flags.out.clone().or(file.out.clone()).or_else(|| match command {
        Command::Info => None,
        _ => Some(PathBuf::from(DEFAULT_OUT)),
    });

    Ok(Resolved {
        command,
        channel,
        state,
        seed,
        optimizer,
        block_level,
        trials: if matches!(command, Command::Sweep | Command::Decouple) {
            trials
        } else {
            0
        },
        prep: flags.prep.or(file.prep).unwrap_or_default(),
        grid,
        info,
        out,
        jobs: flags.jobs.or(file.jobs),
    })
}

fn resolve_grid(command: Command, flag: &GridConfig, file: &GridConfig, src: &Source) -> Result<GridConfig, CliError> {
    fn pick<T: Clone>(flag: &Option<Vec<T>>, file: &Option<Vec<T>>, default: Vec<T>) -> (Vec<T>, Option<&'static str>) {
        match (flag, file) {
            (Some(v), _) => (v.clone(), Some("--grid")),
            (None, Some(v)) => (v.clone(), None),
            (None, None) => (default, None),
        }
    }
    let mut g = GridConfig::default();
    match command {
        Command::Sweep | Command::Decouple => {
            let default_n = if command == Command::Sweep {
                vec![1, 2, 3]
            } else {
                vec![2]
            };
            let (n, origin) = pick(&flag.n, &file.n, default_n);
            if n.is_empty() || n.contains(&0) {
                return Err(src.err("n", origin, "`n` must be a non-empty list of positive integers"));
            }
            g.n = Some(n);
            let (key, values, origin) = if command == Command::Sweep {
                let (v, o) = pick(&flag.rates, &file.rates, vec![0.2, 0.4, 0.6, 0.8, 1.0]);
                ("rates", v, o)
            } else {
                let (v, o) = pick(&flag.log_s, &file.log_s, vec![1.0]);
                ("log_s", v, o)
            };
            if values.is_empty() || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(src.err(
                    key,
                    origin,
                    format!("`{key}` must be a non-empty list of non-negative numbers"),
                ));
            }
            if command == Command::Sweep {
                g.rates = Some(values);
            } else {
                g.log_s = Some(values);
            }
        }
        Command::Superact => {
            let (channels, origin) = pick(&flag.channels, &file.channels, vec!["erasure:p=0.5".into()]);
            if channels.is_empty() {
                return Err(src.err("channels", origin, "`channels` must be non-empty"));
            }
            let (states, origin) = pick(&flag.states, &file.states, vec!["library".into()]);
            if states.is_empty() {
                return Err(src.err("states", origin, "`states` must be non-empty"));
            }
            g.channels = Some(channels);
            g.states = Some(states);
        }
        _ => {}
    }
    Ok(g)
}
