//! Small-n Monte-Carlo of the direct coding construction.
//!
//! Alice holds `A1^n A2^n` of n copies of the transmitted state, applies a
//! Haar-random unitary and projects onto the span `S` of the first `|S|`
//! basis vectors. The protocol works when the retained `S` is decoupled from
//! Eve's `E1^n E2^n`; Bob's decoder is then the Uhlmann isometry.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::capacity::{ChannelStatePair, Preparation, A1, A2, B1, B2, E1, E2};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::info::{coherent_information, PartitionSpec};
use crate::linalg::{c, CMatrix, CVector};
use crate::optimize::{derive_seed, stream_rng};
use crate::state::{trace_distance, LabeledState};

const S: &str = "S";
const BOB: &str = "B";
const EVE: &str = "E";
const BOB_HAT: &str = "B^";
const JUNK: &str = "J";

/// Haar-distributed unitary from an explicit RNG: QR of a complex Ginibre
/// matrix with the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary_with<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let scale = core::f64::consts::FRAC_1_SQRT_2;
    let mut z = CMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            z[(i, j)] = c(re * scale, im * scale);
        }
    }
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let diag = r[(j, j)];
        let n = diag.norm();
        let phase = if n > 0.0 { diag / n } else { c(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(d: usize, seed: u64) -> CMatrix {
    haar_unitary_with(d, &mut stream_rng(seed, 0))
}

/// One simulated run of the protocol.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProtocolTrial {
    pub n: usize,
    /// `log2 |S|` as requested.
    pub log_s: f64,
    pub subspace_dim: usize,
    pub seed: u64,
    /// Probability that the projection onto `S` succeeds.
    pub acceptance: f64,
    /// The projection annihilated the state; `decoupling_error` is then 1.
    pub failed: bool,
    /// Trace distance between `omega^{SE}` and `pi^S (x) omega^E`.
    pub decoupling_error: f64,
    /// Uhlmann fidelity with `Phi^{S B^} (x) psi^{E J}`, when requested.
    pub decoder_fidelity: Option<f64>,
    /// Trace distance of the decoded state from that target.
    pub decoded_error: Option<f64>,
    /// `I(S > B^ J)` of the decoded state.
    pub decoded_coherent_info: Option<f64>,
}

/// `|S| = ceil(2^log_s)`, tolerant of rounding when `log_s` is an integer.
pub fn subspace_dim(log_s: f64) -> usize {
    let raw = libm::exp2(log_s);
    let nearest = libm::round(raw);
    if (raw - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        libm::ceil(raw) as usize
    }
}

/// n copies of the transmitted state grouped as `(A^n, B^n, E^n)`.
#[derive(Debug, Clone)]
pub struct TrialRunner {
    n: usize,
    d_alice: usize,
    d_bob: usize,
    d_eve: usize,
    /// `d_alice x (d_bob * d_eve)` amplitude matrix.
    amplitudes: CMatrix,
}

impl TrialRunner {
    pub fn new(ch: &KrausChannel, rho: &LabeledState, prep: &Preparation, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("need at least one copy".into()));
        }
        let omega = ChannelStatePair::new(ch, rho)?.omega(prep)?;
        let mut joint = omega.with_copy_index(0)?;
        for k in 1..n {
            joint = joint.tensor(&omega.with_copy_index(k)?)?;
        }
        let group = |labels: &[&str]| -> Vec<String> {
            labels
                .iter()
                .flat_map(|l| (0..n).map(move |k| format!("{l}#{k}")))
                .collect()
        };
        let (alice, bob, eve) = (group(&[A1, A2]), group(&[B1, B2]), group(&[E1, E2]));
        let order: Vec<&str> = alice.iter().chain(&bob).chain(&eve).map(String::as_str).collect();
        let joint = joint.permute(&order)?;
        let dim = |g: &[String]| g.iter().map(|l| joint.dim_of(l)).product::<Result<usize>>();
        let (d_alice, d_bob, d_eve) = (dim(&alice)?, dim(&bob)?, dim(&eve)?);
        let v = joint.vector().ok_or(Error::NotPure)?;
        let amplitudes = CMatrix::from_row_slice(d_alice, d_bob * d_eve, v.as_slice());
        Ok(Self {
            n,
            d_alice,
            d_bob,
            d_eve,
            amplitudes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `log2 dim(A1^n A2^n)`, the largest admissible `log_s`.
    pub fn max_log_s(&self) -> f64 {
        libm::log2(self.d_alice as f64)
    }

    pub fn run(&self, log_s: f64, seed: u64, with_decoder: bool) -> Result<ProtocolTrial> {
        if !(0.0..=self.max_log_s() + 1e-12).contains(&log_s) {
            return Err(Error::InvalidParameter(format!(
                "log_s = {log_s} outside [0, {}]",
                self.max_log_s()
            )));
        }
        let ds = subspace_dim(log_s).clamp(1, self.d_alice);
        let mut trial = ProtocolTrial {
            n: self.n,
            log_s,
            subspace_dim: ds,
            seed,
            acceptance: 0.0,
            failed: true,
            decoupling_error: 1.0,
            decoder_fidelity: None,
            decoded_error: None,
            decoded_coherent_info: None,
        };
        let u = haar_unitary(self.d_alice, seed);
        let rotated = u.rows(0, ds) * &self.amplitudes;
        let acceptance = rotated.norm_squared();
        trial.acceptance = acceptance;
        if acceptance < 1e-14 {
            return Ok(trial);
        }
        trial.failed = false;
        let projected = rotated.unscale(libm::sqrt(acceptance));
        let flat = CVector::from_row_slice(projected.transpose().as_slice());
        let post = LabeledState::pure(flat, &[(S, ds), (BOB, self.d_bob), (EVE, self.d_eve)])?;

        let se = post.partial_trace(&[S, EVE])?;
        let eve = post.partial_trace(&[EVE])?;
        let decoupled = LabeledState::maximally_mixed(S, ds)?.tensor(&eve)?;
        trial.decoupling_error = trace_distance(&se, &decoupled)?;

        if with_decoder {
            let psi_e = eve.purify(JUNK)?;
            let junk = psi_e.dim_of(JUNK)?.max(self.d_bob.div_ceil(ds));
            let target = LabeledState::maximally_entangled(S, BOB_HAT, ds)?.tensor(&psi_e.embed(JUNK, junk)?)?;
            let decoding = uhlmann_decode(&post, &target)?;
            trial.decoder_fidelity = Some(decoding.fidelity);
            if let Some(decoded) = decoding.decoded {
                trial.decoded_error = Some(trace_distance(&decoded, &target)?);
                trial.decoded_coherent_info = Some(coherent_information(
                    &decoded,
                    &PartitionSpec::new(&[S], &[BOB_HAT, JUNK]),
                )?);
            }
        }
        Ok(trial)
    }
}

/// One protocol run; see [`TrialRunner`] for repeated runs at fixed `n`.
pub fn simulate_trial(
    ch: &KrausChannel,
    rho: &LabeledState,
    prep: &Preparation,
    n: usize,
    log_s: f64,
    seed: u64,
    with_decoder: bool,
) -> Result<ProtocolTrial> {
    TrialRunner::new(ch, rho, prep, n)?.run(log_s, seed, with_decoder)
}

/// Result of aligning Bob's systems with a target.
#[derive(Debug, Clone)]
pub struct UhlmannDecoding {
    pub fidelity: f64,
    /// Decoded state in the target's label order; present when the target's
    /// Bob space is at least as large as the global one, so the decoder is an isometry.
    pub decoded: Option<LabeledState>,
}

/// Best overlap reachable by an operation on Bob's systems alone.
///
/// Labels shared by both states belong to the reference (same dimensions
/// required); the remaining labels of each state are Bob's.
pub fn uhlmann_decode(global: &LabeledState, target: &LabeledState) -> Result<UhlmannDecoding> {
    if !global.is_pure() || !target.is_pure() {
        return Err(Error::NotPure);
    }
    let common: Vec<&str> = global.labels().into_iter().filter(|l| target.has_label(l)).collect();
    for l in &common {
        if global.dim_of(l)? != target.dim_of(l)? {
            return Err(Error::DimensionMismatch(format!(
                "`{l}` differs between global and target"
            )));
        }
    }
    let bob_g: Vec<&str> = global.labels().into_iter().filter(|l| !target.has_label(l)).collect();
    let bob_t: Vec<&str> = target.labels().into_iter().filter(|l| !global.has_label(l)).collect();
    let as_matrix = |s: &LabeledState, bob: &[&str]| -> Result<(CMatrix, usize)> {
        let order: Vec<&str> = common.iter().chain(bob).copied().collect();
        let p = s.permute(&order)?;
        let b: usize = bob.iter().map(|l| s.dim_of(l)).product::<Result<usize>>()?;
        let rows = s.dim() / b;
        Ok((
            CMatrix::from_row_slice(rows, b, p.vector().expect("pure").as_slice()),
            b,
        ))
    };
    let (g, b) = as_matrix(global, &bob_g)?;
    let (t, b_target) = as_matrix(target, &bob_t)?;
    let m = t.adjoint() * &g;
    let svd = m.svd(true, true);
    let overlap: f64 = svd.singular_values.iter().sum();
    let fidelity = (overlap * overlap).clamp(0.0, 1.0);
    let decoded = if b <= b_target {
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let d = &g * v_t.adjoint() * u.adjoint();
        let flat = CVector::from_row_slice(d.transpose().as_slice());
        let mut systems: Vec<(String, usize)> = Vec::new();
        for l in common.iter().chain(&bob_t) {
            systems.push((l.to_string(), target.dim_of(l)?));
        }
        let refs: Vec<(&str, usize)> = systems.iter().map(|(l, d)| (l.as_str(), *d)).collect();
        let state = LabeledState::pure_normalized(flat, &refs)?;
        Some(state.permute(&target.labels())?)
    } else {
        None
    };
    Ok(UhlmannDecoding { fidelity, decoded })
}

/// Fidelity of the optimal decoder on Bob's systems.
pub fn uhlmann_decoder(global: &LabeledState, target: &LabeledState) -> Result<f64> {
    Ok(uhlmann_decode(global, target)?.fidelity)
}

/// Grid point of a threshold sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    /// Requested `log2|S| / n`.
    pub rate: f64,
    pub log_s: f64,
}

/// Aggregated trials at one grid point.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRow {
    pub n: usize,
    pub log_s_per_n: f64,
    pub mean_error: f64,
    pub stderr: f64,
    pub acceptance: f64,
    pub trials: usize,
    pub failed: usize,
}

/// Grid points ordered by `(n, log_s)`.
pub fn sweep_points(n_list: &[usize], rates: &[f64]) -> Vec<SweepPoint> {
    let mut points: Vec<SweepPoint> = n_list
        .iter()
        .flat_map(|&n| {
            rates.iter().map(move |&r| SweepPoint {
                n,
                rate: r,
                log_s: n as f64 * r,
            })
        })
        .collect();
    points.sort_by(|a, b| a.n.cmp(&b.n).then(a.log_s.total_cmp(&b.log_s)));
    points.dedup();
    points
}

/// Seed of trial `t` at a grid point; independent of the rest of the grid.
pub fn trial_seed(seed: u64, point: &SweepPoint, t: usize) -> u64 {
    derive_seed(seed, &[point.n as u64, point.rate.to_bits(), t as u64])
}

/// Mean and standard error, counting failed projections as error 1.
pub fn aggregate(point: &SweepPoint, trials: &[ProtocolTrial]) -> SweepRow {
    let k = trials.len();
    let errors: Vec<f64> = trials
        .iter()
        .map(|t| if t.failed { 1.0 } else { t.decoupling_error })
        .collect();
    let mean = if k == 0 {
        0.0
    } else {
        errors.iter().sum::<f64>() / k as f64
    };
    let stderr = if k < 2 {
        0.0
    } else {
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (k - 1) as f64;
        libm::sqrt(var / k as f64)
    };
    let acceptance = if k == 0 {
        0.0
    } else {
        trials.iter().map(|t| t.acceptance).sum::<f64>() / k as f64
    };
    SweepRow {
        n: point.n,
        log_s_per_n: point.rate,
        mean_error: mean,
        stderr,
        acceptance,
        trials: k,
        failed: trials.iter().filter(|t| t.failed).count(),
    }
}

/// Mean decoupling error over `trials` seeds at each `(n, rate)` grid point.
pub fn threshold_sweep(
    ch: &KrausChannel,
    rho: &LabeledState,
    prep: &Preparation,
    n_list: &[usize],
    rates: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    let points = sweep_points(n_list, rates);
    let mut rows = Vec::with_capacity(points.len());
    let mut runner: Option<TrialRunner> = None;
    for p in &points {
        if runner.as_ref().is_none_or(|r| r.n() != p.n) {
            runner = Some(TrialRunner::new(ch, rho, prep, p.n)?);
        }
        let r = runner.as_ref().expect("set above");
        let outcomes = (0..trials)
            .map(|t| r.run(p.log_s, trial_seed(seed, p, t), false))
            .collect::<Result<Vec<_>>>()?;
        rows.push(aggregate(p, &outcomes));
    }
    Ok(rows)
}
