//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::time::Instant;

use csc::commands::{converse_terms, par_threshold_sweep};
use csc_core::capacity::{build_omega, father_rates, mother_rates, Preparation, A1, A2, B1, B2, E1, E2};
use csc_core::channel::KrausChannel;
use csc_core::decoupling::{SweepRow, TrialRunner};
use csc_core::info::{coherent_information, mutual_information, PartitionSpec};
use csc_core::linalg::{c, CMatrix};
use csc_core::optimize::{derive_seed, gaussian_vector, stream_rng, OptimizerConfig};
use csc_core::state::shannon_entropy;
use csc_core::superactivation::{bell_diagonal_state, erasure_zero_capacity_check};
use csc_core::LabeledState;

const SEED: u64 = 20;

type Outcome = Result<String, String>;
type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Runs {
    root: PathBuf,
}

impl Runs {
    /// Runs the CLI into `<root>/<tag>/<name>` and returns that directory. The
    /// first pass uses one worker, any other pass two.
    fn cli(&self, tag: &str, name: &str, args: &[&str]) -> Result<PathBuf, String> {
        let out = self.root.join(tag).join(name);
        let mut argv = vec!["csc"];
        argv.extend_from_slice(args);
        let seed = SEED.to_string();
        let out_s = out.to_str().unwrap().to_string();
        let jobs = if tag == "first" { "1" } else { "2" };
        argv.extend(["--seed", &seed, "--out", &out_s, "--jobs", jobs]);
        csc::run(argv).map_err(|e| format!("{name}: {e}"))?;
        Ok(out)
    }
}

fn field(dir: &Path, file: &str, column: &str) -> Result<f64, String> {
    let mut r = csv::Reader::from_path(dir.join(file)).map_err(|e| e.to_string())?;
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == column)
        .ok_or(format!("no column {column}"))?;
    let row = r.records().next().ok_or("empty csv")?.map_err(|e| e.to_string())?;
    row[idx].parse().map_err(|_| format!("bad number `{}`", &row[idx]))
}

fn trivial() -> LabeledState {
    LabeledState::basis("a", 1, 0)
        .unwrap()
        .tensor(&LabeledState::basis("b", 1, 0).unwrap())
        .unwrap()
}

fn criterion_1(runs: &Runs, tag: &str) -> Outcome {
    let mut notes = Vec::new();
    for (name, state, expected) in [("c1-trivial", "trivial", 1.0), ("c1-bell", "bell", 2.0)] {
        let t = Instant::now();
        let dir = runs.cli(tag, name, &["capacity", "--channel", "identity:d=2", "--state", state])?;
        let secs = t.elapsed().as_secs_f64();
        let v = field(&dir, "capacity.csv", "joint_rate")?;
        notes.push(format!("{state}: {v:.6} in {secs:.1}s"));
        if (v - expected).abs() > 1e-4 || secs >= 30.0 {
            return Err(format!(
                "{} (expected {expected:.6} within 1e-4, < 30 s)",
                notes.join(", ")
            ));
        }
    }
    Ok(notes.join(", "))
}

/// `max(0, H(B) - H(E))` with the block spectra of the erasure output on half of `Phi_2`.
fn erasure_oracle(p: f64) -> f64 {
    let h_b = shannon_entropy(&[(1.0 - p) / 2.0, (1.0 - p) / 2.0, p]);
    let h_e = shannon_entropy(&[1.0 - p, p / 2.0, p / 2.0]);
    (h_b - h_e).max(0.0)
}

fn criterion_2(runs: &Runs, tag: &str) -> Outcome {
    let t = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for p in [0.0, 0.1, 0.25, 0.4, 0.5] {
        let spec = format!("erasure:p={p}");
        let dir = runs.cli(
            tag,
            &format!("c2-p{p}"),
            &["capacity", "--channel", &spec, "--state", "trivial"],
        )?;
        let v = field(&dir, "capacity.csv", "joint_rate")?;
        let oracle = erasure_oracle(p);
        ok &= (v - oracle).abs() <= 1e-3;
        notes.push(format!("p={p}: {v:.6} vs {oracle:.6}"));
    }
    let secs = t.elapsed().as_secs_f64();
    notes.push(format!("{secs:.1}s"));
    if ok && secs < 300.0 {
        Ok(notes.join(", "))
    } else {
        Err(notes.join(", "))
    }
}

const C3_CHANNELS: [&str; 4] = ["identity:d=2", "erasure:p=0.25", "erasure:p=0.5", "depolarizing:p=0.2"];
const C3_STATES: [&str; 3] = ["trivial", "bell", "isotropic:F=0.75"];
const C3_EXTRA: [(&str, &str); 2] = [
    ("dephasing:p=0.3", "cc-correlated"),
    ("depolarizing:p=0.1", "bell-diagonal:w0=0.7,w1=0.1,w2=0.1,w3=0.1"),
];

fn c3_pairs() -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = C3_CHANNELS
        .iter()
        .flat_map(|ch| C3_STATES.iter().map(move |st| (ch.to_string(), st.to_string())))
        .collect();
    v.extend(C3_EXTRA.iter().map(|(a, b)| (a.to_string(), b.to_string())));
    v
}

fn criterion_3(runs: &Runs, tag: &str) -> Outcome {
    let pairs = c3_pairs();
    let mut worst = f64::INFINITY;
    for (i, (ch, st)) in pairs.iter().enumerate() {
        let dir = runs.cli(tag, &format!("c3-{i}"), &["compare", "--channel", ch, "--state", st])?;
        let joint = field(&dir, "compare.csv", "joint_rate")?;
        let sep = field(&dir, "compare.csv", "separate_rate")?;
        worst = worst.min(joint - sep);
        if joint < sep - 1e-6 {
            return Err(format!("{ch} with {st}: joint {joint:.6} < separate {sep:.6}"));
        }
    }
    Ok(format!("{} pairs, smallest joint - separate = {worst:.6}", pairs.len()))
}

fn random_mixed(seed: u64, d: usize) -> LabeledState {
    let g = gaussian_vector(&mut stream_rng(seed, 0), 2 * d * d);
    let m = CMatrix::from_fn(d, d, |i, j| c(g[2 * (i * d + j)], g[2 * (i * d + j) + 1]));
    let rho = &m * m.adjoint();
    let tr = rho.trace().re;
    LabeledState::mixed(rho / c(tr, 0.0), &[("x", 2), ("y", d / 2)]).unwrap()
}

fn criterion_4() -> Outcome {
    let channels = [
        KrausChannel::erasure(0.3, 2).unwrap(),
        KrausChannel::depolarizing(0.4).unwrap(),
        KrausChannel::dephasing(0.2).unwrap(),
        KrausChannel::identity(2).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for k in 0..100u64 {
        let ch = &channels[k as usize % channels.len()];
        let rho = random_mixed(derive_seed(SEED, &[4, k]), 4);
        let x = gaussian_vector(
            &mut stream_rng(SEED, 1000 + k),
            Preparation::phi_len(2) + Preparation::encoder_len(2, 2),
        );
        let omega = build_omega(ch, &rho, &Preparation::from_vector(2, 2, &x)).map_err(|e| e.to_string())?;
        let ae = mutual_information(&omega, &PartitionSpec::new(&[A1, A2], &[E1, E2])).unwrap();
        let ab = mutual_information(&omega, &PartitionSpec::new(&[A1, A2], &[B1, B2])).unwrap();
        let ci = coherent_information(&omega, &PartitionSpec::new(&[A1, A2], &[B1, B2])).unwrap();
        worst = worst.max((0.5 * ae + ci - 0.5 * ab).abs());
    }
    if worst <= 1e-8 {
        Ok(format!("100 states, max deviation {worst:.2e}"))
    } else {
        Err(format!("max deviation {worst:.2e} > 1e-8"))
    }
}

fn criterion_5() -> Outcome {
    let bell = LabeledState::maximally_entangled("A2", "B2", 2).unwrap();
    let (m_rate, m_cost) = mother_rates(&bell).map_err(|e| e.to_string())?;
    let cfg = OptimizerConfig {
        seed: SEED,
        ..OptimizerConfig::default()
    };
    let (f_rate, f_cost) = father_rates(&KrausChannel::identity(2).unwrap(), &cfg).map_err(|e| e.to_string())?;
    let bd = bell_diagonal_state([0.5, 0.3, 0.15, 0.05]).unwrap();
    let (r, cost) = mother_rates(&bd).map_err(|e| e.to_string())?;
    let h_a2 = bd.marginal_entropy(&["A2"]).unwrap();
    let detail = format!(
        "mother(Phi2) = ({m_rate:.6}, {m_cost:.6}), father(id) = ({f_rate:.6}, {f_cost:.6}), bell-diagonal rate + cost - H(A2) = {:.1e}",
        r + cost - h_a2
    );
    let ok = (m_rate - 1.0).abs() <= 1e-9
        && m_cost.abs() <= 1e-9
        && (f_rate - 1.0).abs() <= 1e-4
        && f_cost.abs() <= 1e-4
        && (r + cost - h_a2).abs() <= 1e-8;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let fixtures: [(KrausChannel, LabeledState, &[usize]); 3] = [
        (KrausChannel::erasure(0.25, 2).unwrap(), trivial(), &[1, 2, 3]),
        (KrausChannel::depolarizing(0.15).unwrap(), trivial(), &[1, 2]),
        (
            KrausChannel::identity(2).unwrap(),
            bell_diagonal_state([0.85, 0.05, 0.05, 0.05]).unwrap(),
            &[1],
        ),
    ];
    let (mut checked, mut worst) = (0usize, f64::INFINITY);
    for (fi, (ch, rho, ns)) in fixtures.iter().enumerate() {
        let prep = Preparation::maximally_entangled(ch.din(), rho.dim_of(rho.labels()[0]).unwrap());
        for &n in *ns {
            let runner = TrialRunner::new(ch, rho, &prep, n).map_err(|e| e.to_string())?;
            let top = runner.max_log_s();
            for step in 0..=4 {
                let log_s = top * step as f64 / 4.0;
                for t in 0..10u64 {
                    let seed = derive_seed(SEED, &[6, fi as u64, n as u64, step, t]);
                    let trial = runner.run(log_s, seed, true).map_err(|e| e.to_string())?;
                    if let Some((log_d, _, slack)) = converse_terms(&trial) {
                        checked += 1;
                        if slack < -1e-6 {
                            return Err(format!(
                                "n={n} log_S={log_s:.3}: log D = {log_d:.6} exceeds bound by {:.2e}",
                                -slack
                            ));
                        }
                        worst = worst.min(slack);
                    }
                }
            }
        }
    }
    if checked == 0 {
        return Err("no trial produced a decoded state".into());
    }
    Ok(format!("{checked} decoded trials, smallest slack {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let t = Instant::now();
    let ch = KrausChannel::erasure(0.25, 2).unwrap();
    let rho = trivial();
    let prep = Preparation::maximally_entangled(2, 1);
    let omega = build_omega(&ch, &rho, &prep).unwrap();
    let gap = omega.marginal_entropy(&[B1, B2]).unwrap() - omega.marginal_entropy(&[E1, E2]).unwrap();
    let rate = 0.8 * gap;
    let mut notes = Vec::new();
    let mut monotone = true;
    let mut at_rate = Vec::new();
    for n in [1usize, 2, 3] {
        // the log_S ladder log2(k), k = 1..=2^n, plus the rate under test
        let mut rates: Vec<f64> = (1..=1usize << n).map(|k| (k as f64).log2() / n as f64).collect();
        let rows = par_threshold_sweep(&ch, &rho, &prep, &[n], &rates, 100, SEED).map_err(|e| e.to_string())?;
        for w in rows.windows(2) {
            let pooled = (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt();
            if w[1].mean_error < w[0].mean_error - pooled {
                monotone = false;
                notes.push(format!(
                    "n={n}: error drops from {:.6} to {:.6} between log_S/n {:.3} and {:.3}",
                    w[0].mean_error, w[1].mean_error, w[0].log_s_per_n, w[1].log_s_per_n
                ));
            }
        }
        rates = vec![rate];
        let row: SweepRow = par_threshold_sweep(&ch, &rho, &prep, &[n], &rates, 100, SEED)
            .map_err(|e| e.to_string())?
            .remove(0);
        at_rate.push(row.mean_error);
    }
    let secs = t.elapsed().as_secs_f64();
    let trend = at_rate[2] < at_rate[0];
    let summary = format!(
        "rate {rate:.3}: mean error n=1 {:.6}, n=2 {:.6}, n=3 {:.6}; monotone in log_S: {monotone}; {secs:.1}s",
        at_rate[0], at_rate[1], at_rate[2]
    );
    notes.insert(0, summary);
    if trend && monotone && secs < 900.0 {
        Ok(notes.join("; "))
    } else {
        if !trend {
            notes.push("n=3 error is not below n=1".into());
        }
        Err(notes.join("; "))
    }
}

fn criterion_8() -> Outcome {
    let d2 = erasure_zero_capacity_check(2, 500, SEED).map_err(|e| e.to_string())?;
    let d3 = erasure_zero_capacity_check(3, 500, SEED).map_err(|e| e.to_string())?;
    let detail = format!("d=2: {d2:.2e}, d=3: {d3:.2e}");
    if d2 <= 1e-6 && d3 <= 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn csv_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(csv_files(&p));
        } else if p.extension().is_some_and(|e| e == "csv") {
            out.push(p);
        }
    }
    out.sort();
    out
}

fn criterion_9(runs: &Runs) -> Outcome {
    let first = csv_files(&runs.root.join("first"));
    criterion_1(runs, "second").map_err(|e| format!("rerun of 1: {e}"))?;
    criterion_2(runs, "second").map_err(|e| format!("rerun of 2: {e}"))?;
    criterion_3(runs, "second").map_err(|e| format!("rerun of 3: {e}"))?;
    let second = csv_files(&runs.root.join("second"));
    if first.len() != second.len() || first.is_empty() {
        return Err(format!("{} vs {} CSV files", first.len(), second.len()));
    }
    for (a, b) in first.iter().zip(&second) {
        if std::fs::read(a).unwrap() != std::fs::read(b).unwrap() {
            return Err(format!("{} differs from {}", a.display(), b.display()));
        }
    }
    Ok(format!("{} CSV files byte-identical", first.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let runs = Runs {
        root: tmp.path().to_path_buf(),
    };
    let criteria: Vec<(&str, Check)> = vec![
        ("noiseless fixtures", Box::new(|| criterion_1(&runs, "first"))),
        ("erasure law", Box::new(|| criterion_2(&runs, "first"))),
        ("joint >= separate", Box::new(|| criterion_3(&runs, "first"))),
        ("pure-state resource identity", Box::new(criterion_4)),
        ("mother/father reductions", Box::new(criterion_5)),
        ("converse consistency", Box::new(criterion_6)),
        ("decoupling trend", Box::new(criterion_7)),
        ("symmetric-channel nullity", Box::new(criterion_8)),
        ("determinism", Box::new(|| criterion_9(&runs))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let took = t.elapsed();
        match outcome {
            Ok(detail) => println!(
                "PASS criterion {}: {name}: {detail} [{:.1}s]",
                i + 1,
                took.as_secs_f64()
            ),
            Err(detail) => {
                failed += 1;
                println!(
                    "FAIL criterion {}: {name}: {detail} [{:.1}s]",
                    i + 1,
                    took.as_secs_f64()
                );
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
