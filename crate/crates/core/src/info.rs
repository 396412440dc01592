//! Entropic functionals over labeled states.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::state::{shannon_entropy, LabeledState};

/// Two disjoint groups of labels. Labels in neither group are traced out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSpec {
    pub group_a: Vec<String>,
    pub group_b: Vec<String>,
}

impl PartitionSpec {
    pub fn new(group_a: &[&str], group_b: &[&str]) -> Self {
        Self {
            group_a: group_a.iter().map(|s| s.to_string()).collect(),
            group_b: group_b.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn validate(&self, s: &LabeledState) -> Result<()> {
        if let Some(l) = self.group_a.iter().find(|l| self.group_b.contains(l)) {
            return Err(Error::InvalidParameter(format!("label `{l}` appears in both groups")));
        }
        for l in self.group_a.iter().chain(&self.group_b) {
            s.index_of(l)?;
        }
        Ok(())
    }

    fn a(&self) -> Vec<&str> {
        self.group_a.iter().map(String::as_str).collect()
    }

    fn b(&self) -> Vec<&str> {
        self.group_b.iter().map(String::as_str).collect()
    }

    fn ab(&self) -> Vec<&str> {
        self.group_a.iter().chain(&self.group_b).map(String::as_str).collect()
    }
}

struct Entropies {
    a: f64,
    b: f64,
    ab: f64,
}

fn entropies(s: &LabeledState, part: &PartitionSpec, need_a: bool) -> Result<Entropies> {
    part.validate(s)?;
    let a = if need_a { s.marginal_entropy(&part.a())? } else { 0.0 };
    Ok(Entropies {
        a,
        b: s.marginal_entropy(&part.b())?,
        ab: s.marginal_entropy(&part.ab())?,
    })
}

/// `I(A>B) = H(B) - H(AB)` in bits.
pub fn coherent_information(s: &LabeledState, part: &PartitionSpec) -> Result<f64> {
    let e = entropies(s, part, false)?;
    Ok(e.b - e.ab)
}

/// `I(A;B) = H(A) + H(B) - H(AB)` in bits.
pub fn mutual_information(s: &LabeledState, part: &PartitionSpec) -> Result<f64> {
    let e = entropies(s, part, true)?;
    Ok(e.a + e.b - e.ab)
}

/// `H(A|B) = H(AB) - H(B)` in bits.
pub fn conditional_entropy(s: &LabeledState, part: &PartitionSpec) -> Result<f64> {
    let e = entropies(s, part, false)?;
    Ok(e.ab - e.b)
}

/// Binary entropy in bits; `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// Continuity bound `4 eps log_dim + 2 h(eps)` on the change of conditional
/// entropy between states at trace distance `eps`.
pub fn alicki_fannes_bound(epsilon: f64, log_dim: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) || epsilon.is_nan() {
        return Err(Error::InvalidProbability(epsilon));
    }
    Ok(4.0 * epsilon * log_dim + 2.0 * binary_entropy(epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::KrausChannel;
    use crate::linalg::{c, CMatrix};
    use approx::assert_abs_diff_eq;

    fn ab() -> PartitionSpec {
        PartitionSpec::new(&["A"], &["B"])
    }

    #[test]
    fn coherent_information_examples() {
        let phi = LabeledState::maximally_entangled("A", "B", 2).unwrap();
        assert_abs_diff_eq!(coherent_information(&phi, &ab()).unwrap(), 1.0, epsilon = 1e-12);
        let mm = LabeledState::maximally_mixed("A", 2)
            .unwrap()
            .tensor(&LabeledState::maximally_mixed("B", 2).unwrap())
            .unwrap();
        assert_abs_diff_eq!(coherent_information(&mm, &ab()).unwrap(), -1.0, epsilon = 1e-12);
    }

    /// Erasure output of half a Bell pair is block diagonal: with probability `1-p`
    /// the Bell pair itself (block on the unerased subspace), with probability `p`
    /// the flag times `I/2`. Eigenvalues `{1-p, p/2, p/2}`; `H(B)` has eigenvalues
    /// `{(1-p)/2, (1-p)/2, p}`.
    fn erasure_oracle(p: f64) -> f64 {
        let h_b = shannon_entropy(&[(1.0 - p) / 2.0, (1.0 - p) / 2.0, p]);
        let h_ab = shannon_entropy(&[1.0 - p, p / 2.0, p / 2.0]);
        h_b - h_ab
    }

    #[test]
    fn erasure_coherent_information_law() {
        for p in [0.0, 0.25, 0.5] {
            let oracle = erasure_oracle(p);
            assert_abs_diff_eq!(oracle, 1.0 - 2.0 * p, epsilon = 1e-12);
            let ch = KrausChannel::erasure(p, 2).unwrap().with_labels("B", "E");
            let phi = LabeledState::maximally_entangled("A", "X", 2).unwrap();
            let out = ch.apply(&phi, "X").unwrap();
            assert_abs_diff_eq!(coherent_information(&out, &ab()).unwrap(), oracle, epsilon = 1e-10);
        }
    }

    #[test]
    fn mutual_information_examples() {
        let phi = LabeledState::maximally_entangled("A", "B", 2).unwrap();
        assert_abs_diff_eq!(mutual_information(&phi, &ab()).unwrap(), 2.0, epsilon = 1e-12);
        let prod = LabeledState::maximally_mixed("A", 2)
            .unwrap()
            .tensor(&LabeledState::basis("B", 2, 1).unwrap())
            .unwrap();
        assert_abs_diff_eq!(mutual_information(&prod, &ab()).unwrap(), 0.0, epsilon = 1e-12);
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = c(0.5, 0.0);
        m[(3, 3)] = c(0.5, 0.0);
        let cc = LabeledState::mixed(m, &[("A", 2), ("B", 2)]).unwrap();
        // H(A) = H(B) = H(AB) = 1
        assert_abs_diff_eq!(mutual_information(&cc, &ab()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conditional_entropy_examples() {
        let phi = LabeledState::maximally_entangled("A", "B", 2).unwrap();
        assert_abs_diff_eq!(conditional_entropy(&phi, &ab()).unwrap(), -1.0, epsilon = 1e-12);
        let mm = LabeledState::maximally_mixed("A", 2)
            .unwrap()
            .tensor(&LabeledState::maximally_mixed("B", 2).unwrap())
            .unwrap();
        assert_abs_diff_eq!(conditional_entropy(&mm, &ab()).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn partition_errors() {
        let phi = LabeledState::maximally_entangled("A", "B", 2).unwrap();
        assert!(coherent_information(&phi, &PartitionSpec::new(&["A"], &["A"])).is_err());
        assert!(matches!(
            mutual_information(&phi, &PartitionSpec::new(&["A"], &["Q"])),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn alicki_fannes_values() {
        assert_eq!(alicki_fannes_bound(0.0, 3.0).unwrap(), 0.0);
        let h = -0.01 * libm::log2(0.01) - 0.99 * libm::log2(0.99);
        assert_abs_diff_eq!(alicki_fannes_bound(0.01, 1.0).unwrap(), 0.04 + 2.0 * h, epsilon = 1e-15);
        assert_abs_diff_eq!(alicki_fannes_bound(0.01, 1.0).unwrap(), 0.201586, epsilon = 1e-6);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!(alicki_fannes_bound(1.5, 1.0).is_err());
        assert!(alicki_fannes_bound(-0.1, 1.0).is_err());
    }
}
