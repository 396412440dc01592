//! Derivative-free local maximization with seeded restarts.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Restart and budget settings shared by every optimizing operation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct OptimizerConfig {
    pub seed: u64,
    pub restarts: usize,
    /// Objective evaluations allowed per restart.
    pub max_evals: usize,
    /// Minimum objective gain for a move to count as an improvement.
    pub tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            restarts: 32,
            max_evals: 20_000,
            tol: 1e-7,
        }
    }
}

const INITIAL_STEP: f64 = 0.5;
const MIN_STEP: f64 = 1e-6;

/// Outcome of one local search.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Step size shrank below the floor before the budget ran out.
    pub converged: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// Hooke-Jeeves pattern search maximizing `f` from `x0`.
pub fn pattern_search<F: FnMut(&[f64]) -> f64>(f: F, x0: Vec<f64>, max_evals: usize, tol: f64) -> LocalResult {
    let mut obj = Counted { f, evals: 0 };
    let mut base = x0;
    let mut fbase = obj.eval(&base);
    let mut step = INITIAL_STEP;
    let budget = max_evals.max(1);

    let explore = |obj: &mut Counted<F>, x: &mut Vec<f64>, fx: &mut f64, step: f64| {
        for i in 0..x.len() {
            if obj.evals >= budget {
                return;
            }
            let orig = x[i];
            x[i] = orig + step;
            let up = obj.eval(x);
            if up > *fx + tol {
                *fx = up;
                continue;
            }
            x[i] = orig - step;
            let down = obj.eval(x);
            if down > *fx + tol {
                *fx = down;
                continue;
            }
            x[i] = orig;
        }
    };

    loop {
        if step < MIN_STEP || base.is_empty() {
            return LocalResult {
                x: base,
                value: fbase,
                evaluations: obj.evals,
                converged: true,
            };
        }
        if obj.evals >= budget {
            return LocalResult {
                x: base,
                value: fbase,
                evaluations: obj.evals,
                converged: false,
            };
        }
        let mut x = base.clone();
        let mut fx = fbase;
        explore(&mut obj, &mut x, &mut fx, step);
        if fx > fbase + tol {
            // keep extrapolating along the successful direction
            loop {
                let mut pattern: Vec<f64> = x.iter().zip(&base).map(|(a, b)| 2.0 * a - b).collect();
                base = core::mem::take(&mut x);
                fbase = fx;
                if obj.evals >= budget {
                    break;
                }
                let mut fp = obj.eval(&pattern);
                explore(&mut obj, &mut pattern, &mut fp, step);
                if fp > fbase + tol {
                    x = pattern;
                    fx = fp;
                } else {
                    break;
                }
            }
        } else {
            step *= 0.5;
        }
    }
}

/// Independent RNG stream for restart `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard normal vector of length `n`.
pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Deterministic 64-bit mixing of a seed with coordinates (splitmix64 finalizer).
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    let mut z = seed;
    for &c in coords {
        z = z.wrapping_add(c.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn finds_quadratic_maximum() {
        let f = |x: &[f64]| -(x[0] - 1.3).powi(2) - 2.0 * (x[1] + 0.4).powi(2);
        let r = pattern_search(f, alloc::vec![0.0, 0.0], 10_000, 1e-12);
        assert!(r.converged);
        assert_abs_diff_eq!(r.x[0], 1.3, epsilon = 1e-5);
        assert_abs_diff_eq!(r.x[1], -0.4, epsilon = 1e-5);
    }

    #[test]
    fn never_returns_worse_than_start() {
        let f = |x: &[f64]| libm::sin(3.0 * x[0]) * libm::cos(2.0 * x[1]);
        let start = alloc::vec![0.2, -0.7];
        let f0 = f(&start);
        let r = pattern_search(f, start, 500, 1e-7);
        assert!(r.value >= f0);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let f = |x: &[f64]| -x.iter().map(|v| (v - 10.0).powi(2)).sum::<f64>();
        let r = pattern_search(f, alloc::vec![0.0; 6], 20, 1e-9);
        assert!(!r.converged);
        assert!(r.evaluations <= 21);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = gaussian_vector(&mut stream_rng(7, 3), 4);
        let b = gaussian_vector(&mut stream_rng(7, 3), 4);
        let c = gaussian_vector(&mut stream_rng(7, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
    }
}
