//! One-shot entanglement generation from a channel and a shared state.
//!
//! The transmitted state is built by appending a pure state on `(A1, A1')` to
//! a purification of the shared state on `(A2, B2, E2)`, applying an entangling
//! unitary to `(A1', A2)` and sending `A1'` through the channel's dilation into
//! `(B1, E1)`. The objective is the coherent information `I(A1 A2 > B1 B2)`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::channel::{IsometricExtension, KrausChannel};
use crate::error::{Error, Result};
use crate::info::{coherent_information, mutual_information, PartitionSpec};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::optimize::{gaussian_vector, pattern_search, stream_rng, LocalResult, OptimizerConfig};
use crate::state::LabeledState;

pub const A1: &str = "A1";
pub const A1_PRIME: &str = "A1'";
pub const A2: &str = "A2";
pub const B1: &str = "B1";
pub const B2: &str = "B2";
pub const E1: &str = "E1";
pub const E2: &str = "E2";

/// Order of the six systems of the transmitted state.
pub const OMEGA_LABELS: [&str; 6] = [A1, A2, B1, B2, E1, E2];

/// Parameters of an append-and-encode preparation.
///
/// `phi_params` holds `(re, im)` pairs for the `d_a1^2` amplitudes of the
/// appended state on `(A1, A1')` (normalized on use). `encoder_params` holds the
/// `(d_a1 d_a2)^2` real coordinates of a Hermitian generator `H`; the encoder is
/// `exp(iH)` on `(A1', A2)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Preparation {
    pub d_a1: usize,
    pub d_a2: usize,
    pub phi_params: Vec<f64>,
    pub encoder_params: Vec<f64>,
}

impl Preparation {
    pub fn phi_len(d_a1: usize) -> usize {
        2 * d_a1 * d_a1
    }

    pub fn encoder_len(d_a1: usize, d_a2: usize) -> usize {
        (d_a1 * d_a2).pow(2)
    }

    /// Appended state `phi` with the identity encoder.
    pub fn product(d_a1: usize, d_a2: usize, phi_params: Vec<f64>) -> Self {
        Self {
            d_a1,
            d_a2,
            phi_params,
            encoder_params: vec![0.0; Self::encoder_len(d_a1, d_a2)],
        }
    }

    /// Maximally entangled `phi` with the identity encoder.
    pub fn maximally_entangled(d_a1: usize, d_a2: usize) -> Self {
        Self::product(d_a1, d_a2, maximally_entangled_params(d_a1))
    }

    pub fn from_vector(d_a1: usize, d_a2: usize, x: &[f64]) -> Self {
        let split = Self::phi_len(d_a1);
        Self {
            d_a1,
            d_a2,
            phi_params: x[..split].to_vec(),
            encoder_params: x[split..].to_vec(),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = self.phi_params.clone();
        x.extend_from_slice(&self.encoder_params);
        x
    }

    fn check(&self) -> Result<()> {
        if self.phi_params.len() != Self::phi_len(self.d_a1)
            || self.encoder_params.len() != Self::encoder_len(self.d_a1, self.d_a2)
        {
            return Err(Error::InvalidParameter(format!(
                "preparation for d_a1={}, d_a2={} needs {} + {} parameters, got {} + {}",
                self.d_a1,
                self.d_a2,
                Self::phi_len(self.d_a1),
                Self::encoder_len(self.d_a1, self.d_a2),
                self.phi_params.len(),
                self.encoder_params.len()
            )));
        }
        Ok(())
    }

    /// The appended pure state on `(A1, A1')`.
    pub fn phi(&self) -> Result<LabeledState> {
        self.check()?;
        phi_from_params(self.d_a1, &self.phi_params)
    }

    /// The encoder unitary on `(A1', A2)`.
    pub fn encoder(&self) -> Result<CMatrix> {
        self.check()?;
        let n = self.d_a1 * self.d_a2;
        linalg::expm_i_hermitian(&linalg::hermitian_from_params(n, &self.encoder_params))
    }
}

pub fn maximally_entangled_params(d: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 * d * d];
    let amp = 1.0 / libm::sqrt(d as f64);
    for i in 0..d {
        x[2 * (i * d + i)] = amp;
    }
    x
}

fn phi_from_params(d: usize, params: &[f64]) -> Result<LabeledState> {
    let mut v = CVector::from_fn(d * d, |k, _| c(params[2 * k], params[2 * k + 1]));
    if v.norm() < 1e-12 {
        v = CVector::zeros(d * d);
        v[0] = c(1.0, 0.0);
    }
    LabeledState::pure_normalized(v, &[(A1, d), (A1_PRIME, d)])
}

/// Best value found by the optimizer. `value` is an achieved objective, hence
/// a lower bound on the optimum, never a certified maximum.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CapacityEstimate {
    /// Bits per channel use (divided by the block length).
    pub value: f64,
    pub best_prep: Preparation,
    pub block_level: usize,
    pub restarts: usize,
    pub evaluations: usize,
    /// Whether the restart that produced `value` converged within its budget.
    pub converged: bool,
    pub history: Vec<(usize, f64)>,
}

/// A channel and shared state with the purification and dilation precomputed.
#[derive(Debug, Clone)]
pub struct ChannelStatePair {
    iso: IsometricExtension,
    psi: LabeledState,
    state_coherent_info: f64,
    d_a1: usize,
    d_a2: usize,
}

impl ChannelStatePair {
    /// `rho` must have exactly two systems, read as `(A2, B2)` in order.
    pub fn new(ch: &KrausChannel, rho: &LabeledState) -> Result<Self> {
        if rho.systems().len() != 2 {
            return Err(Error::InvalidParameter(format!(
                "the shared state must be bipartite, got {} systems",
                rho.systems().len()
            )));
        }
        let labels = rho.labels();
        let (la, lb): (alloc::string::String, alloc::string::String) = (labels[0].into(), labels[1].into());
        let rho = rho.relabel(|l: &str| {
            if l == la {
                A2.into()
            } else if l == lb {
                B2.into()
            } else {
                l.into()
            }
        })?;
        let psi = rho.purify(E2)?;
        let state_coherent_info = coherent_information(&rho, &PartitionSpec::new(&[A2], &[B2]))?;
        let iso = ch.isometric_extension().with_labels(B1, E1);
        let (d_a1, d_a2) = (ch.din(), psi.dim_of(A2)?);
        let total = d_a1 * d_a2 * iso.dout() * iso.denv() * psi.dim_of(B2)? * psi.dim_of(E2)?;
        linalg::check_vector_dim(total)?;
        linalg::check_matrix_dim((iso.dout() * psi.dim_of(B2)?).min(iso.denv() * psi.dim_of(E2)?))?;
        Ok(Self {
            iso,
            psi,
            state_coherent_info,
            d_a1,
            d_a2,
        })
    }

    pub fn d_a1(&self) -> usize {
        self.d_a1
    }

    pub fn d_a2(&self) -> usize {
        self.d_a2
    }

    /// `I(A2 > B2)` of the shared state alone.
    pub fn state_coherent_info(&self) -> f64 {
        self.state_coherent_info
    }

    /// Purification of the shared state on `(A2, B2, E2)`.
    pub fn purified_state(&self) -> &LabeledState {
        &self.psi
    }

    pub fn param_len(&self) -> usize {
        Preparation::phi_len(self.d_a1) + Preparation::encoder_len(self.d_a1, self.d_a2)
    }

    fn check_prep(&self, prep: &Preparation) -> Result<()> {
        if prep.d_a1 != self.d_a1 || prep.d_a2 != self.d_a2 {
            return Err(Error::DimensionMismatch(format!(
                "preparation for ({}, {}) but the problem has dim A1' = {}, dim A2 = {}",
                prep.d_a1, prep.d_a2, self.d_a1, self.d_a2
            )));
        }
        Ok(())
    }

    /// Global pure state on `(A1, A2, B1, B2, E1, E2)`.
    pub fn omega(&self, prep: &Preparation) -> Result<LabeledState> {
        self.check_prep(prep)?;
        let joint = prep.phi()?.tensor(&self.psi)?;
        let encoded = joint.apply_unitary(&[A1_PRIME, A2], &prep.encoder()?)?;
        self.iso.apply(&encoded, A1_PRIME)?.permute(&OMEGA_LABELS)
    }

    pub fn objective(&self, prep: &Preparation) -> Result<f64> {
        coherent_information(&self.omega(prep)?, &PartitionSpec::new(&[A1, A2], &[B1, B2]))
    }

    /// `phi` on `(A1, A1')` through the channel, as a pure state on `(A1, B1, E1)`.
    pub fn channel_output(&self, phi_params: &[f64]) -> Result<LabeledState> {
        self.iso.apply(&phi_from_params(self.d_a1, phi_params)?, A1_PRIME)
    }

    /// `I(A1 > B1)` for the appended state alone.
    pub fn channel_term(&self, phi_params: &[f64]) -> Result<f64> {
        coherent_information(&self.channel_output(phi_params)?, &PartitionSpec::new(&[A1], &[B1]))
    }
}

fn maximize_phi<F>(d_a1: usize, cfg: &OptimizerConfig, stream_base: u64, f: F) -> (LocalResult, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let mut best: Option<LocalResult> = None;
    let mut evals = 0;
    for i in 0..cfg.restarts.max(1) {
        let x0 = if i == 0 {
            maximally_entangled_params(d_a1)
        } else {
            gaussian_vector(
                &mut stream_rng(cfg.seed, stream_base + i as u64),
                Preparation::phi_len(d_a1),
            )
        };
        let r = pattern_search(&f, x0, cfg.max_evals, cfg.tol);
        evals += r.evaluations;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    (best.expect("at least one restart"), evals)
}

/// Offset separating the channel-term RNG streams from the joint-search ones.
const CHANNEL_TERM_STREAMS: u64 = 1 << 32;
const FATHER_STREAMS: u64 = 2 << 32;

/// The separate strategy: channel coding on `A1'` plus distillation of the state.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparateStrategy {
    /// `max_phi I(A1 > B1)`.
    pub channel_term: f64,
    /// `I(A2 > B2)` of the shared state.
    pub state_term: f64,
    pub phi_params: Vec<f64>,
    pub evaluations: usize,
}

impl SeparateStrategy {
    pub fn rate(&self) -> f64 {
        self.channel_term + self.state_term
    }
}

pub fn separate_strategy_for(pair: &ChannelStatePair, cfg: &OptimizerConfig) -> SeparateStrategy {
    let (best, evaluations) = maximize_phi(pair.d_a1, cfg, CHANNEL_TERM_STREAMS, |x| {
        pair.channel_term(x).unwrap_or(f64::NEG_INFINITY)
    });
    SeparateStrategy {
        channel_term: best.value,
        state_term: pair.state_coherent_info,
        phi_params: best.x,
        evaluations,
    }
}

pub fn separate_strategy(ch: &KrausChannel, rho: &LabeledState, cfg: &OptimizerConfig) -> Result<SeparateStrategy> {
    Ok(separate_strategy_for(&ChannelStatePair::new(ch, rho)?, cfg))
}

/// `max_phi I(A1 > B1) + I(A2 > B2)`.
pub fn separate_strategy_rate(ch: &KrausChannel, rho: &LabeledState, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(separate_strategy(ch, rho, cfg)?.rate())
}

/// Multi-restart maximization of the joint objective, split into independent
/// restarts so callers may run them in parallel.
///
/// Restart 0 starts at the separate strategy's argmax with the identity
/// encoder, restart 1 at the maximally entangled `phi` with the identity
/// encoder, the rest at Gaussian random parameters from stream `(seed, i)`.
#[derive(Debug, Clone)]
pub struct CapacitySearch {
    pair: ChannelStatePair,
    cfg: OptimizerConfig,
    separate: SeparateStrategy,
}

impl CapacitySearch {
    pub fn new(ch: &KrausChannel, rho: &LabeledState, cfg: &OptimizerConfig) -> Result<Self> {
        let pair = ChannelStatePair::new(ch, rho)?;
        let separate = separate_strategy_for(&pair, cfg);
        Ok(Self {
            pair,
            cfg: *cfg,
            separate,
        })
    }

    pub fn pair(&self) -> &ChannelStatePair {
        &self.pair
    }

    pub fn separate(&self) -> &SeparateStrategy {
        &self.separate
    }

    pub fn restarts(&self) -> usize {
        self.cfg.restarts.max(1)
    }

    pub fn start(&self, i: usize) -> Vec<f64> {
        let (d1, d2) = (self.pair.d_a1, self.pair.d_a2);
        match i {
            0 => Preparation::product(d1, d2, self.separate.phi_params.clone()).to_vector(),
            1 => Preparation::maximally_entangled(d1, d2).to_vector(),
            _ => gaussian_vector(&mut stream_rng(self.cfg.seed, i as u64), self.pair.param_len()),
        }
    }

    pub fn run_restart(&self, i: usize) -> LocalResult {
        let (d1, d2) = (self.pair.d_a1, self.pair.d_a2);
        let f = |x: &[f64]| {
            self.pair
                .objective(&Preparation::from_vector(d1, d2, x))
                .unwrap_or(f64::NEG_INFINITY)
        };
        pattern_search(f, self.start(i), self.cfg.max_evals, self.cfg.tol)
    }

    /// Merges restart outcomes (indexed by restart) into an estimate; ties keep the lowest index.
    pub fn finish(&self, results: Vec<LocalResult>, block_level: usize) -> CapacityEstimate {
        let mut best = 0;
        for (i, r) in results.iter().enumerate() {
            if r.value > results[best].value {
                best = i;
            }
        }
        let (d1, d2) = (self.pair.d_a1, self.pair.d_a2);
        let l = block_level as f64;
        CapacityEstimate {
            value: results[best].value / l,
            best_prep: Preparation::from_vector(d1, d2, &results[best].x),
            block_level,
            restarts: results.len(),
            evaluations: self.separate.evaluations + results.iter().map(|r| r.evaluations).sum::<usize>(),
            converged: results[best].converged,
            history: results.iter().enumerate().map(|(i, r)| (i, r.value / l)).collect(),
        }
    }

    pub fn run(&self, block_level: usize) -> CapacityEstimate {
        let results = (0..self.restarts()).map(|i| self.run_restart(i)).collect();
        self.finish(results, block_level)
    }
}

/// Global pure state `N(P(rho))` on `(A1, A2, B1, B2, E1, E2)`.
pub fn build_omega(ch: &KrausChannel, rho: &LabeledState, prep: &Preparation) -> Result<LabeledState> {
    ChannelStatePair::new(ch, rho)?.omega(prep)
}

/// `I(A1 A2 > B1 B2)` of the transmitted state.
pub fn objective(ch: &KrausChannel, rho: &LabeledState, prep: &Preparation) -> Result<f64> {
    ChannelStatePair::new(ch, rho)?.objective(prep)
}

/// Achieved lower bound on the one-shot capacity.
pub fn one_shot_capacity(ch: &KrausChannel, rho: &LabeledState, cfg: &OptimizerConfig) -> Result<CapacityEstimate> {
    Ok(CapacitySearch::new(ch, rho, cfg)?.run(1))
}

/// `l` uses of the channel and `l` copies of the state as one block, as a bipartite
/// state on `(A2, B2)` and a channel on the blocked input.
pub fn blocked_inputs(ch: &KrausChannel, rho: &LabeledState, l: usize) -> Result<(KrausChannel, LabeledState)> {
    if !(1..=2).contains(&l) {
        return Err(Error::InvalidParameter(format!("block level must be 1 or 2, got {l}")));
    }
    if rho.systems().len() != 2 {
        return Err(Error::InvalidParameter("the shared state must be bipartite".into()));
    }
    let blocked_ch = ch.tensor_power(l)?;
    if l == 1 {
        return Ok((blocked_ch, rho.clone()));
    }
    let labels = rho.labels();
    let (la, lb) = (labels[0], labels[1]);
    let mut joint = rho.with_copy_index(0)?;
    for k in 1..l {
        joint = joint.tensor(&rho.with_copy_index(k)?)?;
    }
    let a: Vec<_> = (0..l).map(|k| format!("{la}#{k}")).collect();
    let b: Vec<_> = (0..l).map(|k| format!("{lb}#{k}")).collect();
    let order: Vec<&str> = a.iter().chain(&b).map(|s| s.as_str()).collect();
    let joint = joint.permute(&order)?;
    let a_refs: Vec<&str> = a.iter().map(|s| s.as_str()).collect();
    let b_refs: Vec<&str> = b.iter().map(|s| s.as_str()).collect();
    let blocked = joint.merge_systems(&a_refs, A2)?.merge_systems(&b_refs, B2)?;
    Ok((blocked_ch, blocked))
}

/// Per-use capacity estimate with `l` channel uses and state copies blocked together.
pub fn blocked_capacity(
    ch: &KrausChannel,
    rho: &LabeledState,
    l: usize,
    cfg: &OptimizerConfig,
) -> Result<CapacityEstimate> {
    let (bch, brho) = blocked_inputs(ch, rho, l)?;
    Ok(CapacitySearch::new(&bch, &brho, cfg)?.run(l))
}

/// Classical communication cost `I(A1 A2 ; E1 E2)` of the direct coding scheme.
pub fn cc_cost(ch: &KrausChannel, rho: &LabeledState, prep: &Preparation) -> Result<f64> {
    mutual_information(&build_omega(ch, rho, prep)?, &PartitionSpec::new(&[A1, A2], &[E1, E2]))
}

/// Father reduction: maximize `I(A1;B1)/2` over `phi`, reporting `I(A1;E1)/2` at the argmax.
pub fn father_rates(ch: &KrausChannel, cfg: &OptimizerConfig) -> Result<(f64, f64)> {
    let trivial = LabeledState::basis("a", 1, 0)?.tensor(&LabeledState::basis("b", 1, 0)?)?;
    let pair = ChannelStatePair::new(ch, &trivial)?;
    let ab = PartitionSpec::new(&[A1], &[B1]);
    let (best, _) = maximize_phi(pair.d_a1, cfg, FATHER_STREAMS, |x| {
        pair.channel_output(x)
            .and_then(|s| mutual_information(&s, &ab))
            .map(|v| 0.5 * v)
            .unwrap_or(f64::NEG_INFINITY)
    });
    let out = pair.channel_output(&best.x)?;
    let cost = 0.5 * mutual_information(&out, &PartitionSpec::new(&[A1], &[E1]))?;
    Ok((best.value, cost))
}

/// Mother reduction: `(I(A2;B2)/2, I(A2;E2)/2)` on the purification of `rho`.
pub fn mother_rates(rho: &LabeledState) -> Result<(f64, f64)> {
    let pair = ChannelStatePair::new(&KrausChannel::identity(1)?, rho)?;
    let psi = pair.purified_state();
    let rate = 0.5 * mutual_information(psi, &PartitionSpec::new(&[A2], &[B2]))?;
    let cost = 0.5 * mutual_information(psi, &PartitionSpec::new(&[A2], &[E2]))?;
    Ok((rate, cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::trace_distance;
    use approx::assert_abs_diff_eq;

    fn trivial() -> LabeledState {
        LabeledState::basis("a", 1, 0)
            .unwrap()
            .tensor(&LabeledState::basis("b", 1, 0).unwrap())
            .unwrap()
    }

    fn bell() -> LabeledState {
        LabeledState::maximally_entangled("a", "b", 2).unwrap()
    }

    fn quick() -> OptimizerConfig {
        OptimizerConfig {
            seed: 11,
            restarts: 4,
            max_evals: 4_000,
            tol: 1e-7,
        }
    }

    fn random_prep(d1: usize, d2: usize, seed: u64) -> Preparation {
        let mut rng = stream_rng(seed, 0);
        let x = gaussian_vector(&mut rng, Preparation::phi_len(d1) + Preparation::encoder_len(d1, d2));
        Preparation::from_vector(d1, d2, &x)
    }

    #[test]
    fn omega_for_noiseless_channel_is_bell_pair() {
        let id = KrausChannel::identity(2).unwrap();
        let omega = build_omega(&id, &trivial(), &Preparation::maximally_entangled(2, 1)).unwrap();
        assert_eq!(omega.labels(), OMEGA_LABELS);
        let ab = omega.partial_trace(&[A1, B1]).unwrap();
        let expected = LabeledState::maximally_entangled(A1, B1, 2)
            .unwrap()
            .to_mixed()
            .unwrap();
        assert!(trace_distance(&ab, &expected).unwrap() < 1e-12);
    }

    #[test]
    fn identity_encoder_factorizes() {
        let ch = KrausChannel::erasure(0.3, 2).unwrap();
        let pair = ChannelStatePair::new(&ch, &bell()).unwrap();
        let mut prep = random_prep(2, 2, 5);
        prep.encoder_params.iter_mut().for_each(|v| *v = 0.0);
        let omega = pair.omega(&prep).unwrap();
        let first = omega.partial_trace(&[A1, B1, E1]).unwrap();
        let second = omega.partial_trace(&[A2, B2, E2]).unwrap();
        let product = first.tensor(&second).unwrap().permute(&OMEGA_LABELS).unwrap();
        assert!(trace_distance(&omega.to_mixed().unwrap(), &product).unwrap() < 1e-10);
    }

    #[test]
    fn omega_is_globally_pure() {
        let ch = KrausChannel::depolarizing(0.2).unwrap();
        let rho = LabeledState::maximally_mixed("a", 2)
            .unwrap()
            .tensor(&LabeledState::maximally_mixed("b", 2).unwrap())
            .unwrap();
        let pair = ChannelStatePair::new(&ch, &rho).unwrap();
        for seed in 0..50 {
            let omega = pair.omega(&random_prep(2, 2, seed)).unwrap();
            assert!(omega.is_pure());
            let spec = omega.to_mixed().unwrap().spectrum().unwrap();
            assert!(spec.eigenvalues[1] < 1e-8);
            assert_abs_diff_eq!(spec.eigenvalues[0], 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn objective_examples() {
        let id = KrausChannel::identity(2).unwrap();
        let me = Preparation::maximally_entangled(2, 1);
        assert_abs_diff_eq!(objective(&id, &trivial(), &me).unwrap(), 1.0, epsilon = 1e-12);
        let me2 = Preparation::maximally_entangled(2, 2);
        assert_abs_diff_eq!(objective(&id, &bell(), &me2).unwrap(), 2.0, epsilon = 1e-12);
        let er = KrausChannel::erasure(0.5, 2).unwrap();
        for seed in 0..20 {
            assert!(objective(&er, &trivial(), &random_prep(2, 1, seed)).unwrap() <= 1e-7);
        }
    }

    #[test]
    fn wrong_preparation_shape_rejected() {
        let id = KrausChannel::identity(2).unwrap();
        assert!(objective(&id, &bell(), &Preparation::maximally_entangled(2, 1)).is_err());
        let mut bad = Preparation::maximally_entangled(2, 1);
        bad.phi_params.pop();
        assert!(objective(&id, &trivial(), &bad).is_err());
    }

    #[test]
    fn one_shot_noiseless() {
        let id = KrausChannel::identity(2).unwrap();
        let est = one_shot_capacity(&id, &trivial(), &quick()).unwrap();
        assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-4);
        let obj = objective(&id, &trivial(), &est.best_prep).unwrap();
        assert_abs_diff_eq!(est.value, obj, epsilon = 1e-9);
        let max_hist = est.history.iter().map(|h| h.1).fold(f64::NEG_INFINITY, f64::max);
        assert!(est.value >= max_hist - 1e-12);
    }

    #[test]
    fn one_shot_is_deterministic() {
        let ch = KrausChannel::erasure(0.2, 2).unwrap();
        let a = one_shot_capacity(&ch, &trivial(), &quick()).unwrap();
        let b = one_shot_capacity(&ch, &trivial(), &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blocked_level_one_matches_unblocked() {
        let ch = KrausChannel::erasure(0.1, 2).unwrap();
        let a = one_shot_capacity(&ch, &trivial(), &quick()).unwrap();
        let b = blocked_capacity(&ch, &trivial(), 1, &quick()).unwrap();
        assert_eq!(a, b);
        assert!(blocked_capacity(&ch, &trivial(), 3, &quick()).is_err());
    }

    #[test]
    fn blocked_noiseless_is_additive() {
        let id = KrausChannel::identity(2).unwrap();
        let cfg = OptimizerConfig { restarts: 2, ..quick() };
        let b = blocked_capacity(&id, &trivial(), 2, &cfg).unwrap();
        assert_abs_diff_eq!(b.value, 1.0, epsilon = 1e-3);
    }

    #[test]
    fn separate_strategy_examples() {
        let er = KrausChannel::erasure(0.5, 2).unwrap();
        assert_abs_diff_eq!(
            separate_strategy_rate(&er, &bell(), &quick()).unwrap(),
            1.0,
            epsilon = 1e-6
        );
        let id = KrausChannel::identity(2).unwrap();
        assert_abs_diff_eq!(
            separate_strategy_rate(&id, &bell(), &quick()).unwrap(),
            2.0,
            epsilon = 1e-6
        );
    }

    #[test]
    fn separate_strategy_depolarizing_matches_choi_oracle() {
        // channel term at the maximally entangled input is 1 - H(Choi spectrum);
        // the state term of I/4 is exactly -1
        let p = 0.1;
        let choi = [1.0 - 0.75 * p, p / 4.0, p / 4.0, p / 4.0];
        let oracle = 1.0 - crate::state::shannon_entropy(&choi);
        let rho = LabeledState::maximally_mixed("a", 2)
            .unwrap()
            .tensor(&LabeledState::maximally_mixed("b", 2).unwrap())
            .unwrap();
        let s = separate_strategy(&KrausChannel::depolarizing(p).unwrap(), &rho, &quick()).unwrap();
        assert_abs_diff_eq!(s.state_term, -1.0, epsilon = 1e-12);
        assert!(s.channel_term >= oracle - 1e-9);
        assert_abs_diff_eq!(s.channel_term, oracle, epsilon = 1e-4);
    }

    #[test]
    fn cc_cost_examples() {
        let id = KrausChannel::identity(2).unwrap();
        assert_abs_diff_eq!(
            cc_cost(&id, &bell(), &Preparation::maximally_entangled(2, 2)).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        let er = KrausChannel::erasure(1.0, 2).unwrap();
        assert_abs_diff_eq!(
            cc_cost(&er, &trivial(), &Preparation::maximally_entangled(2, 1)).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        let ch = KrausChannel::depolarizing(0.3).unwrap();
        for seed in 0..10 {
            assert!(cc_cost(&ch, &bell(), &random_prep(2, 2, seed)).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn mother_and_father_examples() {
        let (r, q) = mother_rates(&bell()).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-9);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        let cc = LabeledState::mixed(m, &[("a", 2), ("b", 2)]).unwrap();
        let (r, q) = mother_rates(&cc).unwrap();
        assert_abs_diff_eq!(r, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(q, 0.5, epsilon = 1e-9);
        let (r, q) = father_rates(&KrausChannel::identity(2).unwrap(), &quick()).unwrap();
        assert_abs_diff_eq!(r, 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(q, 0.0, epsilon = 1e-4);
    }

    #[test]
    fn isometry_on_b2_leaves_objective_unchanged() {
        let ch = KrausChannel::dephasing(0.2).unwrap();
        let pair = ChannelStatePair::new(&ch, &bell()).unwrap();
        let prep = random_prep(2, 2, 9);
        let omega = pair.omega(&prep).unwrap();
        let part = PartitionSpec::new(&[A1, A2], &[B1, B2]);
        let before = coherent_information(&omega, &part).unwrap();
        let mut v = CMatrix::zeros(3, 2);
        let u = linalg::expm_i_hermitian(&linalg::hermitian_from_params(2, &[0.3, -0.2, 0.8, 0.5])).unwrap();
        for i in 0..3 {
            for j in 0..2 {
                v[(i, j)] = if i < 2 { u[(i, j)] } else { c(0.0, 0.0) };
            }
        }
        let v = IsometricExtension::new(v, 3, 1, "B2x", "F").unwrap();
        let moved = v.apply(&omega, B2).unwrap();
        let after = coherent_information(&moved, &PartitionSpec::new(&[A1, A2], &[B1, "B2x"])).unwrap();
        assert_abs_diff_eq!(before, after, epsilon = 1e-9);
    }

    #[test]
    fn father_style_preparation_meets_reduction_bound() {
        // with E ebits, the father argmax plus identity encoder reaches
        // I(A1;B1)/2 + E - I(A1;E1)/2
        let ch = KrausChannel::erasure(0.2, 2).unwrap();
        let cfg = quick();
        let (rate, cost) = father_rates(&ch, &cfg).unwrap();
        let pair = ChannelStatePair::new(&ch, &bell()).unwrap();
        let sep = separate_strategy_for(&pair, &cfg);
        let prep = Preparation::product(2, 2, sep.phi_params.clone());
        let e = 1.0;
        assert!(e >= cost);
        assert!(pair.objective(&prep).unwrap() >= rate + (e - cost) - 1e-6);
    }
}
