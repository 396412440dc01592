//! Command dispatch. Every command that writes artifacts finishes with a manifest.

use std::path::{Path, PathBuf};
use std::time::Instant;

use csc_core::capacity::{blocked_inputs, CapacityEstimate, CapacitySearch, Preparation};
use csc_core::channel::KrausChannel;
use csc_core::decoupling::{aggregate, sweep_points, trial_seed, ProtocolTrial, SweepRow, TrialRunner};
use csc_core::info::{alicki_fannes_bound, coherent_information, mutual_information, PartitionSpec};
use csc_core::optimize::derive_seed;
use csc_core::superactivation::{candidate_state_library, ppt_check, ActivationGrid};
use csc_core::LabeledState;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Command, InfoQuantity, PrepChoice, Resolved};
use crate::error::{CliError, During};
use crate::output::{emit_csv, fmt_f64, fmt_opt, slug, write_atomic, write_manifest, Manifest};
use crate::specs::{parse_channel, parse_state};

pub const SWEEP_HEADER: [&str; 6] = ["n", "log_S_per_n", "mean_error", "stderr", "acceptance", "trials"];
pub const SUPERACT_HEADER: [&str; 7] = [
    "state_id",
    "channel",
    "joint_rate",
    "separate_rate",
    "gap",
    "ppt",
    "seed",
];
pub const CAPACITY_HEADER: [&str; 9] = [
    "channel",
    "state",
    "block_level",
    "joint_rate",
    "separate_rate",
    "restarts",
    "evaluations",
    "converged",
    "seed",
];
pub const COMPARE_HEADER: [&str; 8] = [
    "channel",
    "state",
    "joint_rate",
    "separate_rate",
    "channel_term",
    "state_term",
    "gap",
    "seed",
];
pub const TRIALS_HEADER: [&str; 14] = [
    "n",
    "log_S",
    "subspace_dim",
    "trial",
    "seed",
    "acceptance",
    "failed",
    "decoupling_error",
    "decoder_fidelity",
    "decoded_error",
    "decoded_coherent_info",
    "log_D",
    "af_bound",
    "converse_slack",
];

/// What a run printed and wrote.
#[derive(Debug, Default)]
pub struct Report {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
    pub manifest: Option<PathBuf>,
}

struct Artifacts<'a> {
    dir: Option<&'a Path>,
    report: Report,
}

impl Artifacts<'_> {
    fn say(&mut self, key: &str, value: impl std::fmt::Display) {
        self.report.lines.push(format!("{key} {value}"));
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if let Some(dir) = self.dir {
            let path = dir.join(name);
            emit_csv(header, rows, &path)?;
            self.report.files.push(path);
        }
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        if let Some(dir) = self.dir {
            let path = dir.join(name);
            let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
            bytes.push(b'\n');
            write_atomic(&path, &bytes)?;
            self.report.files.push(path);
        }
        Ok(())
    }
}

/// Runs the resolved command on a pool of `cfg.jobs` workers.
pub fn execute(cfg: &Resolved) -> Result<Report, CliError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::config(format!("cannot start {} workers: {e}", cfg.jobs.unwrap_or(0))))?;
    let mut art = Artifacts {
        dir: cfg.out.as_deref(),
        report: Report::default(),
    };
    pool.install(|| match cfg.command {
        Command::Capacity => capacity(cfg, &mut art),
        Command::Compare => compare(cfg, &mut art),
        Command::Sweep => sweep(cfg, &mut art),
        Command::Decouple => decouple(cfg, &mut art),
        Command::Superact => superact(cfg, &mut art),
        Command::Info => info(cfg, &mut art),
    })?;
    if let Some(dir) = cfg.out.as_deref() {
        let outputs: Vec<String> = art
            .report
            .files
            .iter()
            .map(|p| p.strip_prefix(dir).unwrap_or(p).display().to_string())
            .collect();
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: cfg.command.name(),
            seed: cfg.seed,
            config_hash: crate::output::config_hash(cfg),
            config: cfg,
            wall_time_s: start.elapsed().as_secs_f64(),
            outputs: &outputs,
        };
        art.report.manifest = Some(write_manifest(dir, &manifest)?);
    }
    Ok(art.report)
}

fn channel_and_state(cfg: &Resolved) -> Result<(KrausChannel, LabeledState), CliError> {
    let ch = parse_channel(cfg.channel.as_deref().expect("resolved"))?;
    let rho = parse_state(cfg.state.as_deref().expect("resolved"))?;
    Ok((ch, rho))
}

/// Restarts run in parallel on the current pool; merging is order-preserving.
pub fn par_capacity(search: &CapacitySearch, block_level: usize) -> CapacityEstimate {
    let results = (0..search.restarts())
        .into_par_iter()
        .map(|i| search.run_restart(i))
        .collect();
    search.finish(results, block_level)
}

fn search_for(cfg: &Resolved) -> Result<CapacitySearch, CliError> {
    let (ch, rho) = channel_and_state(cfg)?;
    let (ch, rho) = blocked_inputs(&ch, &rho, cfg.block_level).during("blocked_capacity")?;
    CapacitySearch::new(&ch, &rho, &cfg.optimizer).during("one_shot_capacity")
}

fn capacity(cfg: &Resolved, art: &mut Artifacts) -> Result<(), CliError> {
    let search = search_for(cfg)?;
    let est = par_capacity(&search, cfg.block_level);
    let l = cfg.block_level as f64;
    art.say("joint_rate", fmt_f64(est.value));
    art.say("separate_rate", fmt_f64(search.separate().rate() / l));
    art.say("evaluations", est.evaluations);
    art.say("converged", est.converged);
    let row = vec![
        cfg.channel.clone().unwrap_or_default(),
        cfg.state.clone().unwrap_or_default(),
        cfg.block_level.to_string(),
        fmt_f64(est.value),
        fmt_f64(search.separate().rate() / l),
        est.restarts.to_string(),
        est.evaluations.to_string(),
        est.converged.to_string(),
        cfg.seed.to_string(),
    ];
    art.csv("capacity.csv", &CAPACITY_HEADER, &[row])?;
    let history: Vec<Vec<String>> = est
        .history
        .iter()
        .map(|(i, v)| vec![i.to_string(), fmt_f64(*v)])
        .collect();
    art.csv("history.csv", &["restart", "value"], &history)?;
    art.json("best_prep.json", &est.best_prep)
}

fn compare(cfg: &Resolved, art: &mut Artifacts) -> Result<(), CliError> {
    let search = search_for(cfg)?;
    let est = par_capacity(&search, cfg.block_level);
    let l = cfg.block_level as f64;
    let sep = search.separate();
    let (joint, separate) = (est.value, sep.rate() / l);
    art.say("joint_rate", fmt_f64(joint));
    art.say("separate_rate", fmt_f64(separate));
    art.say("gap", fmt_f64(joint - separate));
    let row = vec![
        cfg.channel.clone().unwrap_or_default(),
        cfg.state.clone().unwrap_or_default(),
        fmt_f64(joint),
        fmt_f64(separate),
        fmt_f64(sep.channel_term / l),
        fmt_f64(sep.state_term / l),
        fmt_f64(joint - separate),
        cfg.seed.to_string(),
    ];
    art.csv("compare.csv", &COMPARE_HEADER, &[row])
}

fn preparation(cfg: &Resolved, ch: &KrausChannel, rho: &LabeledState) -> Result<Preparation, CliError> {
    let search = CapacitySearch::new(ch, rho, &cfg.optimizer).during("one_shot_capacity")?;
    Ok(match cfg.prep {
        PrepChoice::MaxEntangled => Preparation::maximally_entangled(search.pair().d_a1(), search.pair().d_a2()),
        PrepChoice::Optimized => par_capacity(&search, 1).best_prep,
    })
}

/// Parallel version of the core threshold sweep; rows are identical to the sequential one.
pub fn par_threshold_sweep(
    ch: &KrausChannel,
    rho: &LabeledState,
    prep: &Preparation,
    n_list: &[usize],
    rates: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>, CliError> {
    let points = sweep_points(n_list, rates);
    let mut rows = Vec::with_capacity(points.len());
    let mut ns: Vec<usize> = points.iter().map(|p| p.n).collect();
    ns.dedup();
    for n in ns {
        let runner = TrialRunner::new(ch, rho, prep, n).during("simulate_trial")?;
        let here: Vec<_> = points.iter().filter(|p| p.n == n).collect();
        let jobs: Vec<_> = here.iter().flat_map(|p| (0..trials).map(move |t| (*p, t))).collect();
        let outcomes: Vec<ProtocolTrial> = jobs
            .into_par_iter()
            .map(|(p, t)| runner.run(p.log_s, trial_seed(seed, p, t), false))
            .collect::<csc_core::Result<_>>()
            .during("simulate_trial")?;
        for (p, chunk) in here.iter().zip(outcomes.chunks(trials.max(1))) {
            rows.push(aggregate(p, chunk));
        }
    }
    Ok(rows)
}

pub fn sweep_rows(rows: &[SweepRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.n.to_string(),
                fmt_f64(r.log_s_per_n),
                fmt_f64(r.mean_error),
                fmt_f64(r.stderr),
                fmt_f64(r.acceptance),
                r.trials.to_string(),
            ]
        })
        .collect()
}

fn sweep(cfg: &Resolved, art: &mut Artifacts) -> Result<(), CliError> {
    let (ch, rho) = channel_and_state(cfg)?;
    let prep = preparation(cfg, &ch, &rho)?;
    let n_list = cfg.grid.n.as_deref().expect("resolved");
    let rates = cfg.grid.rates.as_deref().expect("resolved");
    let rows = par_threshold_sweep(&ch, &rho, &prep, n_list, rates, cfg.trials, cfg.seed)?;
    for r in &rows {
        art.report.lines.push(format!(
            "n={} rate={} mean_error={} stderr={}",
            r.n,
            fmt_f64(r.log_s_per_n),
            fmt_f64(r.mean_error),
            fmt_f64(r.stderr)
        ));
    }
    let failed: usize = rows.iter().map(|r| r.failed).sum();
    if failed > 0 {
        art.say("failed_projections", failed);
    }
    art.csv("sweep.csv", &SWEEP_HEADER, &sweep_rows(&rows))
}

/// `log2 |S|`, the Alicki-Fannes slack, and `I + bound - log D` for a decoded trial.
pub fn converse_terms(t: &ProtocolTrial) -> Option<(f64, f64, f64)> {
    let (eps, ci) = (t.decoded_error?, t.decoded_coherent_info?);
    let log_d = (t.subspace_dim as f64).log2();
    let bound = alicki_fannes_bound(eps.clamp(0.0, 1.0), log_d).ok()?;
    Some((log_d, bound, ci + bound - log_d))
}

fn decouple(cfg: &Resolved, art: &mut Artifacts) -> Result<(), CliError> {
    let (ch, rho) = channel_and_state(cfg)?;
    let prep = preparation(cfg, &ch, &rho)?;
    let log_s = cfg.grid.log_s.as_deref().expect("resolved");
    let mut rows = Vec::new();
    let mut worst = f64::INFINITY;
    for &n in cfg.grid.n.as_deref().expect("resolved") {
        let runner = TrialRunner::new(&ch, &rho, &prep, n).during("simulate_trial")?;
        let jobs: Vec<(f64, usize)> = log_s
            .iter()
            .flat_map(|&l| (0..cfg.trials).map(move |t| (l, t)))
            .collect();
        let trials: Vec<ProtocolTrial> = jobs
            .par_iter()
            .map(|&(l, t)| runner.run(l, derive_seed(cfg.seed, &[n as u64, l.to_bits(), t as u64]), true))
            .collect::<csc_core::Result<_>>()
            .during("simulate_trial")?;
        for (&(_, t), tr) in jobs.iter().zip(&trials) {
            let conv = converse_terms(tr);
            if let Some((_, _, slack)) = conv {
                worst = worst.min(slack);
            }
            rows.push(vec![
                tr.n.to_string(),
                fmt_f64(tr.log_s),
                tr.subspace_dim.to_string(),
                t.to_string(),
                tr.seed.to_string(),
                fmt_f64(tr.acceptance),
                tr.failed.to_string(),
                fmt_f64(tr.decoupling_error),
                fmt_opt(tr.decoder_fidelity),
                fmt_opt(tr.decoded_error),
                fmt_opt(tr.decoded_coherent_info),
                fmt_opt(conv.map(|c| c.0)),
                fmt_opt(conv.map(|c| c.1)),
                fmt_opt(conv.map(|c| c.2)),
            ]);
        }
        let mean = trials.iter().map(|t| t.decoupling_error).sum::<f64>() / trials.len().max(1) as f64;
        art.report
            .lines
            .push(format!("n={n} trials={} mean_error={}", trials.len(), fmt_f64(mean)));
    }
    if worst.is_finite() {
        art.say("min_converse_slack", fmt_f64(worst));
    }
    art.csv("trials.csv", &TRIALS_HEADER, &rows)
}

#[derive(Serialize)]
struct Detail<'a> {
    state_id: &'a str,
    channel: &'a str,
    seed: u64,
    joint_rate: f64,
    separate_rate: f64,
    gap: f64,
    ppt: bool,
    estimate: &'a CapacityEstimate,
}

fn superact(cfg: &Resolved, art: &mut Artifacts) -> Result<(), CliError> {
    let mut channels = Vec::new();
    for spec in cfg.grid.channels.as_deref().expect("resolved") {
        channels.push((spec.clone(), parse_channel(spec)?));
    }
    let mut states = Vec::new();
    for spec in cfg.grid.states.as_deref().expect("resolved") {
        if spec == "library" {
            let lib = candidate_state_library().during("candidate_state_library")?;
            states.extend(lib.into_iter().map(|c| (c.id, c.state)));
        } else {
            states.push((spec.clone(), parse_state(spec)?));
        }
    }
    let grid = ActivationGrid {
        channels,
        states,
        cfg: cfg.optimizer,
    };
    let tasks = grid.tasks();
    let outcomes = tasks.par_iter().map(|t| (*t, grid.run_task(t))).collect();
    let search = grid.collect(outcomes);

    let mut rows = Vec::new();
    for r in &search.reports {
        let seed = r.seeds[0];
        rows.push(vec![
            r.state_id.clone(),
            r.channel_desc.clone(),
            fmt_f64(r.joint_rate),
            fmt_f64(r.separate_rate),
            fmt_f64(r.gap),
            r.ppt_certified.to_string(),
            seed.to_string(),
        ]);
        let detail = Detail {
            state_id: &r.state_id,
            channel: &r.channel_desc,
            seed,
            joint_rate: r.joint_rate,
            separate_rate: r.separate_rate,
            gap: r.gap,
            ppt: r.ppt_certified,
            estimate: &r.estimate,
        };
        art.json(
            &format!("details/{}__{}.json", slug(&r.state_id), slug(&r.channel_desc)),
            &detail,
        )?;
    }
    if let Some(best) = search.reports.first() {
        art.say(
            "best_gap",
            format!("{} ({} / {})", fmt_f64(best.gap), best.state_id, best.channel_desc),
        );
    }
    art.say("instances", search.reports.len());
    art.csv("superact.csv", &SUPERACT_HEADER, &rows)?;
    if !search.failures.is_empty() {
        art.say("failures", search.failures.len());
        let rows: Vec<Vec<String>> = search
            .failures
            .iter()
            .map(|f| {
                vec![
                    f.state_id.clone(),
                    f.channel_desc.clone(),
                    f.seed.to_string(),
                    f.error.to_string(),
                ]
            })
            .collect();
        art.csv("failures.csv", &["state_id", "channel", "seed", "error"], &rows)?;
    }
    Ok(())
}

fn partition(rho: &LabeledState, a: &Option<Vec<String>>, b: &Option<Vec<String>>) -> (Vec<String>, Vec<String>) {
    let labels: Vec<String> = rho.labels().into_iter().map(String::from).collect();
    let a = a.clone().unwrap_or_else(|| labels[..1].to_vec());
    let b = b
        .clone()
        .unwrap_or_else(|| labels.iter().filter(|l| !a.contains(l)).cloned().collect());
    (a, b)
}

fn info(cfg: &Resolved, art: &mut Artifacts) -> Result<(), CliError> {
    let rho = parse_state(cfg.state.as_deref().expect("resolved"))?;
    let q = cfg.info.as_ref().expect("resolved");
    let (a, b) = partition(&rho, &q.a, &q.b);
    let a_ref: Vec<&str> = a.iter().map(String::as_str).collect();
    let b_ref: Vec<&str> = b.iter().map(String::as_str).collect();
    let part = PartitionSpec::new(&a_ref, &b_ref);
    let bad_part = |e: csc_core::Error| CliError::config(format!("partition {a:?} | {b:?}: {e}"));
    let rows = match q.quantity {
        InfoQuantity::Entropy => vec![(
            "entropy",
            fmt_f64(rho.von_neumann_entropy().during("von_neumann_entropy")?),
        )],
        InfoQuantity::Coherent => {
            part.validate(&rho).map_err(bad_part)?;
            vec![(
                "coherent_information",
                fmt_f64(coherent_information(&rho, &part).during("coherent_information")?),
            )]
        }
        InfoQuantity::Mutual => {
            part.validate(&rho).map_err(bad_part)?;
            vec![(
                "mutual_information",
                fmt_f64(mutual_information(&rho, &part).during("mutual_information")?),
            )]
        }
        InfoQuantity::Ppt => {
            part.validate(&rho).map_err(bad_part)?;
            let (ppt, min) = match ppt_check(&rho, &part) {
                Err(e @ csc_core::Error::InvalidParameter(_)) => return Err(bad_part(e)),
                other => other.during("ppt_check")?,
            };
            vec![("ppt", ppt.to_string()), ("min_eig", fmt_f64(min))]
        }
    };
    for (k, v) in &rows {
        art.say(k, v);
    }
    let rows: Vec<Vec<String>> = rows.into_iter().map(|(k, v)| vec![k.to_string(), v]).collect();
    art.csv("info.csv", &["quantity", "value"], &rows)
}
