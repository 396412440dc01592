//! Zero-capacity erasure checks, PPT certificates, a library of candidate
//! shared states and the joint-vs-separate gap search.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::capacity::{CapacityEstimate, CapacitySearch, ChannelStatePair, Preparation};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::info::PartitionSpec;
use crate::linalg::{c, hermitian_eigenvalues, CMatrix, STATE_TOL};
use crate::optimize::{derive_seed, gaussian_vector, pattern_search, stream_rng, OptimizerConfig};
use crate::state::LabeledState;

/// Largest `I(A1 > B1)` found for `erasure(p, d)` over `samples` random pure
/// inputs (plus the maximally entangled one), polished by local search.
pub fn erasure_coherent_info_probe(p: f64, d: usize, samples: usize, seed: u64) -> Result<f64> {
    if d < 2 {
        return Err(Error::InvalidParameter(format!(
            "input dimension must be at least 2, got {d}"
        )));
    }
    let trivial = LabeledState::basis("a", 1, 0)?.tensor(&LabeledState::basis("b", 1, 0)?)?;
    let pair = ChannelStatePair::new(&KrausChannel::erasure(p, d)?, &trivial)?;
    let f = |x: &[f64]| pair.channel_term(x).unwrap_or(f64::NEG_INFINITY);
    let mut rng = stream_rng(seed, 0);
    let mut best_x = crate::capacity::maximally_entangled_params(d);
    let mut best = f(&best_x);
    for _ in 0..samples {
        let x = gaussian_vector(&mut rng, Preparation::phi_len(d));
        let v = f(&x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let polished = pattern_search(f, best_x, 5_000, 1e-9);
    Ok(polished.value.max(best))
}

/// Maximum coherent information found for the symmetric `erasure(0.5, d)`.
pub fn erasure_zero_capacity_check(d: usize, samples: usize, seed: u64) -> Result<f64> {
    erasure_coherent_info_probe(0.5, d, samples, seed)
}

/// Peres-Horodecki test: partial transpose on `group_b`. The partition must
/// cover every label of `rho`.
pub fn ppt_check(rho: &LabeledState, part: &PartitionSpec) -> Result<(bool, f64)> {
    part.validate(rho)?;
    let covered = part.group_a.len() + part.group_b.len();
    if covered != rho.systems().len() {
        return Err(Error::InvalidParameter(format!(
            "partition covers {covered} of {} systems",
            rho.systems().len()
        )));
    }
    let b: Vec<&str> = part.group_b.iter().map(String::as_str).collect();
    let pt = rho.partial_transpose(&b)?;
    let min = hermitian_eigenvalues(&pt)?.last().copied().unwrap_or(0.0);
    Ok((min >= -STATE_TOL, min))
}

fn bipartite_ppt(rho: &LabeledState) -> Result<(bool, f64)> {
    let labels = rho.labels();
    ppt_check(rho, &PartitionSpec::new(&labels[..1], &labels[1..]))
}

/// `F |Phi><Phi| + (1 - F)(I - |Phi><Phi|)/(d^2 - 1)` on `(A2, B2)`.
pub fn isotropic_state(d: usize, fidelity: f64) -> Result<LabeledState> {
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(Error::InvalidProbability(fidelity));
    }
    let phi = LabeledState::maximally_entangled("A2", "B2", d)?.density();
    let n = d * d;
    let id = CMatrix::identity(n, n);
    let noise = (id - &phi) * c((1.0 - fidelity) / (n as f64 - 1.0), 0.0);
    LabeledState::mixed(phi * c(fidelity, 0.0) + noise, &[("A2", d), ("B2", d)])
}

/// Mixture of the Bell states `Phi+, Phi-, Psi+, Psi-` with `weights`.
pub fn bell_diagonal_state(weights: [f64; 4]) -> Result<LabeledState> {
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let bells: [[f64; 4]; 4] = [[h, 0.0, 0.0, h], [h, 0.0, 0.0, -h], [0.0, h, h, 0.0], [0.0, h, -h, 0.0]];
    let mut m = CMatrix::zeros(4, 4);
    for (w, b) in weights.iter().zip(bells) {
        if *w < 0.0 {
            return Err(Error::InvalidProbability(*w));
        }
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += c(w * b[i] * b[j], 0.0);
            }
        }
    }
    LabeledState::mixed(m, &[("A2", 2), ("B2", 2)])
}

/// Horodecki's 3x3 family, PPT and entangled for `0 < a < 1`.
pub fn horodecki_ppt_state(a: f64) -> Result<LabeledState> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidParameter(format!(
            "Horodecki parameter {a} outside [0, 1]"
        )));
    }
    let mut m = CMatrix::zeros(9, 9);
    for i in [0, 1, 2, 3, 4, 5, 7, 8] {
        m[(i, i)] = c(a, 0.0);
    }
    for (i, j) in [(0, 4), (0, 8), (4, 8)] {
        m[(i, j)] = c(a, 0.0);
        m[(j, i)] = c(a, 0.0);
    }
    let off = libm::sqrt(1.0 - a * a) / 2.0;
    m[(6, 6)] = c((1.0 + a) / 2.0, 0.0);
    m[(8, 8)] = c((1.0 + a) / 2.0, 0.0);
    m[(6, 8)] = c(off, 0.0);
    m[(8, 6)] = c(off, 0.0);
    let m = m * c(1.0 / (8.0 * a + 1.0), 0.0);
    LabeledState::mixed(m, &[("A2", 3), ("B2", 3)])
}

/// Library entry with its PPT certificate.
#[derive(Debug, Clone)]
pub struct CandidateState {
    pub id: String,
    pub state: LabeledState,
    pub params: Vec<(String, f64)>,
    pub ppt: bool,
    pub min_partial_transpose_eig: f64,
}

fn candidate(id: String, state: LabeledState, params: Vec<(String, f64)>) -> Result<CandidateState> {
    let (ppt, min) = bipartite_ppt(&state)?;
    Ok(CandidateState {
        id,
        state,
        params,
        ppt,
        min_partial_transpose_eig: min,
    })
}

/// Isotropic qubit states, Bell-diagonal states and the Horodecki 3x3 PPT-entangled family.
pub fn candidate_state_library() -> Result<Vec<CandidateState>> {
    let mut lib = Vec::new();
    for f in [0.25, 0.5, 0.75, 1.0] {
        lib.push(candidate(
            format!("isotropic-F{f}"),
            isotropic_state(2, f)?,
            vec![("F".into(), f)],
        )?);
    }
    for w in [[0.4, 0.3, 0.2, 0.1], [0.5, 0.5, 0.0, 0.0], [0.7, 0.1, 0.1, 0.1]] {
        let id = format!("bell-diagonal-{}-{}-{}-{}", w[0], w[1], w[2], w[3]);
        let params = w.iter().enumerate().map(|(i, v)| (format!("w{i}"), *v)).collect();
        lib.push(candidate(id, bell_diagonal_state(w)?, params)?);
    }
    for a in [0.1, 0.3, 0.5, 0.7, 0.9] {
        lib.push(candidate(
            format!("horodecki-a{a}"),
            horodecki_ppt_state(a)?,
            vec![("a".into(), a)],
        )?);
    }
    Ok(lib)
}

/// Joint and separate rates for one channel and shared state.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationReport {
    pub state_id: String,
    pub channel_desc: String,
    pub joint_rate: f64,
    pub separate_rate: f64,
    /// `joint_rate - separate_rate`.
    pub gap: f64,
    pub ppt_certified: bool,
    pub seeds: Vec<u64>,
    pub estimate: CapacityEstimate,
}

pub fn joint_vs_separate(
    ch: &KrausChannel,
    rho: &LabeledState,
    cfg: &OptimizerConfig,
    state_id: &str,
    channel_desc: &str,
) -> Result<ActivationReport> {
    let search = CapacitySearch::new(ch, rho, cfg)?;
    let estimate = search.run(1);
    let separate_rate = search.separate().rate();
    let (ppt_certified, _) = bipartite_ppt(rho)?;
    Ok(ActivationReport {
        state_id: state_id.to_string(),
        channel_desc: channel_desc.to_string(),
        joint_rate: estimate.value,
        separate_rate,
        gap: estimate.value - separate_rate,
        ppt_certified,
        seeds: vec![cfg.seed],
        estimate,
    })
}

/// Channels x states grid for [`activation_search`].
#[derive(Debug, Clone)]
pub struct ActivationGrid {
    pub channels: Vec<(String, KrausChannel)>,
    pub states: Vec<(String, LabeledState)>,
    pub cfg: OptimizerConfig,
}

/// One grid point with its derived seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActivationTask {
    pub channel: usize,
    pub state: usize,
    pub seed: u64,
}

/// A grid point whose evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFailure {
    pub state_id: String,
    pub channel_desc: String,
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, Default)]
pub struct ActivationSearch {
    /// Sorted by gap, largest first.
    pub reports: Vec<ActivationReport>,
    pub failures: Vec<GridFailure>,
}

impl ActivationGrid {
    /// Channel-major enumeration of the grid.
    pub fn tasks(&self) -> Vec<ActivationTask> {
        let mut out = Vec::with_capacity(self.channels.len() * self.states.len());
        for ci in 0..self.channels.len() {
            for si in 0..self.states.len() {
                out.push(ActivationTask {
                    channel: ci,
                    state: si,
                    seed: derive_seed(self.cfg.seed, &[ci as u64, si as u64]),
                });
            }
        }
        out
    }

    pub fn run_task(&self, task: &ActivationTask) -> Result<ActivationReport> {
        let (cdesc, ch) = &self.channels[task.channel];
        let (sid, rho) = &self.states[task.state];
        let cfg = OptimizerConfig {
            seed: task.seed,
            ..self.cfg
        };
        joint_vs_separate(ch, rho, &cfg, sid, cdesc)
    }

    /// Assembles task outcomes (in [`tasks`](Self::tasks) order) into a sorted search result.
    pub fn collect(&self, outcomes: Vec<(ActivationTask, Result<ActivationReport>)>) -> ActivationSearch {
        let mut search = ActivationSearch::default();
        for (task, outcome) in outcomes {
            match outcome {
                Ok(r) => search.reports.push(r),
                Err(error) => search.failures.push(GridFailure {
                    state_id: self.states[task.state].0.clone(),
                    channel_desc: self.channels[task.channel].0.clone(),
                    seed: task.seed,
                    error,
                }),
            }
        }
        // stable sort keeps grid order among equal gaps
        search.reports.sort_by(|a, b| b.gap.total_cmp(&a.gap));
        search
    }
}

/// Every grid point's report, largest gap first; failing points are collected separately.
pub fn activation_search(grid: &ActivationGrid) -> ActivationSearch {
    let outcomes = grid.tasks().into_iter().map(|t| (t, grid.run_task(&t))).collect();
    grid.collect(outcomes)
}
