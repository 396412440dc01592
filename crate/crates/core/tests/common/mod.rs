#![allow(dead_code)]

use csc_core::channel::KrausChannel;
use csc_core::decoupling::haar_unitary_with;
use csc_core::linalg::{c, CMatrix, CVector};
use csc_core::optimize::stream_rng;
use csc_core::LabeledState;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 0)
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| c(gauss(rng), gauss(rng)))
}

pub fn random_pure(rng: &mut ChaCha8Rng, systems: &[(&str, usize)]) -> LabeledState {
    let n: usize = systems.iter().map(|s| s.1).product();
    let v = CVector::from_fn(n, |_, _| c(gauss(rng), gauss(rng)));
    LabeledState::pure_normalized(v, systems).unwrap()
}

/// Random mixed state of random rank.
pub fn random_mixed(rng: &mut ChaCha8Rng, systems: &[(&str, usize)]) -> LabeledState {
    let n: usize = systems.iter().map(|s| s.1).product();
    let rank = rng.random_range(1..=n);
    let g = ginibre(rng, n, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    LabeledState::mixed(m / c(tr, 0.0), systems).unwrap()
}

/// Random channel from the first `din` columns of a Haar unitary on `dout * k`.
pub fn random_channel(rng: &mut ChaCha8Rng, din: usize, dout: usize, k: usize) -> KrausChannel {
    assert!(din <= dout * k);
    let u = haar_unitary_with(dout * k, rng);
    let kraus = (0..k)
        .map(|j| CMatrix::from_fn(dout, din, |o, i| u[(o * k + j, i)]))
        .collect();
    KrausChannel::new(kraus).unwrap()
}
