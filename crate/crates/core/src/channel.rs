//! Quantum channels as Kraus sets and Stinespring dilations.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, c, check_matrix_dim, CMatrix, CVector, STATE_TOL};
use crate::state::LabeledState;

/// A CPTP map given by Kraus operators of shape `dout x din`.
///
/// Applying the channel to system `target` of a state rebinds that factor to
/// `out_label`; the dilation additionally introduces `env_label`.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    kraus: Vec<CMatrix>,
    din: usize,
    dout: usize,
    out_label: String,
    env_label: String,
    description: String,
}

/// Isometry `V: in -> out (x) env`, stored as a `(dout*denv) x din` matrix.
#[derive(Debug, Clone)]
pub struct IsometricExtension {
    v: CMatrix,
    din: usize,
    dout: usize,
    denv: usize,
    out_label: String,
    env_label: String,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(p));
    }
    Ok(())
}

fn pauli(k: usize) -> CMatrix {
    let (a, b, cc, d) = match k {
        0 => (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)),
        1 => (c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        2 => (c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        _ => (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
    };
    CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

impl KrausChannel {
    /// Validates shapes and `sum_k K_k^dagger K_k = I` within `1e-9`.
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("a channel needs at least one Kraus operator".into()))?;
        let (dout, din) = (first.nrows(), first.ncols());
        if din == 0 || dout == 0 {
            return Err(Error::InvalidParameter("Kraus operators must be non-empty".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.nrows() != dout || k.ncols() != din) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator of shape {}x{} in a {dout}x{din} set",
                k.nrows(),
                k.ncols()
            )));
        }
        let sum = kraus
            .iter()
            .fold(CMatrix::zeros(din, din), |acc, k| acc + k.adjoint() * k);
        let dev = linalg::max_abs_diff(&sum, &CMatrix::identity(din, din));
        if dev > STATE_TOL {
            return Err(Error::IncompleteKraus(dev));
        }
        Ok(Self {
            kraus,
            din,
            dout,
            out_label: "out".into(),
            env_label: "env".into(),
            description: "kraus".into(),
        })
    }

    /// Sets the labels that outputs and environments receive on application.
    pub fn with_labels(mut self, out_label: &str, env_label: &str) -> Self {
        self.out_label = out_label.to_string();
        self.env_label = env_label.to_string();
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    pub fn identity(d: usize) -> Result<Self> {
        Ok(Self::new(alloc::vec![CMatrix::identity(d, d)])?.with_description(format!("identity:d={d}")))
    }

    /// Erasure with probability `p` onto the flag state `|d>` of a `d+1` dimensional output.
    pub fn erasure(p: f64, d: usize) -> Result<Self> {
        check_probability(p)?;
        if d == 0 {
            return Err(Error::InvalidParameter(
                "erasure input dimension must be positive".into(),
            ));
        }
        let mut keep = CMatrix::zeros(d + 1, d);
        let s = libm::sqrt(1.0 - p);
        for i in 0..d {
            keep[(i, i)] = c(s, 0.0);
        }
        let mut kraus = alloc::vec![keep];
        let sp = libm::sqrt(p);
        for i in 0..d {
            let mut k = CMatrix::zeros(d + 1, d);
            k[(d, i)] = c(sp, 0.0);
            kraus.push(k);
        }
        Ok(Self::new(kraus)?.with_description(format!("erasure:p={p},d={d}")))
    }

    /// Qubit depolarizing channel `rho -> (1-p) rho + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_probability(p)?;
        let mut kraus = alloc::vec![pauli(0) * c(libm::sqrt(1.0 - 0.75 * p), 0.0)];
        for k in 1..4 {
            kraus.push(pauli(k) * c(libm::sqrt(p / 4.0), 0.0));
        }
        Ok(Self::new(kraus)?.with_description(format!("depolarizing:p={p}")))
    }

    /// Qubit dephasing channel `rho -> (1-p) rho + p Z rho Z`.
    pub fn dephasing(p: f64) -> Result<Self> {
        check_probability(p)?;
        let kraus = alloc::vec![pauli(0) * c(libm::sqrt(1.0 - p), 0.0), pauli(3) * c(libm::sqrt(p), 0.0),];
        Ok(Self::new(kraus)?.with_description(format!("dephasing:p={p}")))
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    /// Environment dimension of the canonical dilation (number of Kraus operators).
    pub fn denv(&self) -> usize {
        self.kraus.len()
    }

    pub fn out_label(&self) -> &str {
        &self.out_label
    }

    pub fn env_label(&self) -> &str {
        &self.env_label
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `V = sum_k K_k (x) |k>_env`.
    pub fn isometric_extension(&self) -> IsometricExtension {
        let denv = self.kraus.len();
        let mut v = CMatrix::zeros(self.dout * denv, self.din);
        for (k, op) in self.kraus.iter().enumerate() {
            for o in 0..self.dout {
                for i in 0..self.din {
                    v[(o * denv + k, i)] = op[(o, i)];
                }
            }
        }
        IsometricExtension {
            v,
            din: self.din,
            dout: self.dout,
            denv,
            out_label: self.out_label.clone(),
            env_label: self.env_label.clone(),
        }
    }

    /// `sum_k K_k rho K_k^dagger` on system `target`, which becomes `out_label`.
    pub fn apply(&self, s: &LabeledState, target: &str) -> Result<LabeledState> {
        let i = s.index_of(target)?;
        let din = s.systems()[i].dim;
        if din != self.din {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} but `{target}` has dimension {din}",
                self.din
            )));
        }
        if self.out_label != target && s.has_label(&self.out_label) {
            return Err(Error::DuplicateLabel(self.out_label.clone()));
        }
        let rest = s.dim() / din;
        check_matrix_dim(self.dout * rest)?;
        let front = s.front(&[target])?.to_mixed()?;
        let rho = front.density();
        let id = CMatrix::identity(rest, rest);
        let mut out = CMatrix::zeros(self.dout * rest, self.dout * rest);
        for k in &self.kraus {
            let big = linalg::kron(k, &id);
            out += &big * &rho * big.adjoint();
        }
        let mut systems = front.systems().to_vec();
        systems[0] = crate::state::Subsystem::new(self.out_label.clone(), self.dout);
        let moved = LabeledState::from_matrix_unchecked(out, systems);
        let order: Vec<&str> = s
            .systems()
            .iter()
            .enumerate()
            .map(|(k, sys)| {
                if k == i {
                    self.out_label.as_str()
                } else {
                    sys.label.as_str()
                }
            })
            .collect();
        moved.permute(&order)
    }

    /// The complementary channel's output: the dilation with `out_label` traced away.
    pub fn apply_complementary(&self, s: &LabeledState, target: &str) -> Result<LabeledState> {
        let full = self.isometric_extension().apply(s, target)?;
        let keep: Vec<&str> = full.labels().into_iter().filter(|l| *l != self.out_label).collect();
        full.partial_trace(&keep)
    }

    /// `n` parallel uses as one channel on the blocked input; Kraus set of all n-fold products.
    pub fn tensor_power(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("tensor power needs n >= 1".into()));
        }
        if n == 1 {
            return Ok(self.clone());
        }
        let dout = self.dout.checked_pow(n as u32).ok_or(Error::DimensionCap {
            required: usize::MAX,
            cap: linalg::dim_cap(),
        })?;
        check_matrix_dim(dout)?;
        let count = self.kraus.len().pow(n as u32);
        check_matrix_dim(count)?;
        let mut kraus = self.kraus.clone();
        for _ in 1..n {
            let mut next = Vec::with_capacity(kraus.len() * self.kraus.len());
            for a in &kraus {
                for b in &self.kraus {
                    next.push(linalg::kron(a, b));
                }
            }
            kraus = next;
        }
        Ok(Self {
            kraus,
            din: self.din.pow(n as u32),
            dout,
            out_label: self.out_label.clone(),
            env_label: self.env_label.clone(),
            description: format!("({})^{n}", self.description),
        })
    }

    /// `(id (x) N)(Phi_din)` on `(ref_label, out_label)`.
    pub fn choi_state(&self, ref_label: &str) -> Result<LabeledState> {
        let phi = LabeledState::maximally_entangled(ref_label, "\u{0}in", self.din)?;
        self.apply(&phi, "\u{0}in")
    }
}

impl IsometricExtension {
    /// Wraps an explicit isometry; checks `V^dagger V = I` within `1e-9`.
    pub fn new(v: CMatrix, dout: usize, denv: usize, out_label: &str, env_label: &str) -> Result<Self> {
        if v.nrows() != dout * denv {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} rows, expected {dout}*{denv}",
                v.nrows()
            )));
        }
        let din = v.ncols();
        let dev = linalg::max_abs_diff(&(v.adjoint() * &v), &CMatrix::identity(din, din));
        if dev > STATE_TOL {
            return Err(Error::InvalidParameter(format!(
                "V^dagger V deviates from identity by {dev:e}"
            )));
        }
        Ok(Self {
            v,
            din,
            dout,
            denv,
            out_label: out_label.into(),
            env_label: env_label.into(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    pub fn din(&self) -> usize {
        self.din
    }

    pub fn dout(&self) -> usize {
        self.dout
    }

    pub fn denv(&self) -> usize {
        self.denv
    }

    pub fn with_labels(mut self, out_label: &str, env_label: &str) -> Self {
        self.out_label = out_label.to_string();
        self.env_label = env_label.to_string();
        self
    }

    /// Replaces `target` by the adjacent pair `(out_label, env_label)`; pure inputs stay pure.
    pub fn apply(&self, s: &LabeledState, target: &str) -> Result<LabeledState> {
        let din = s.dim_of(target)?;
        if din != self.din {
            return Err(Error::DimensionMismatch(format!(
                "isometry input dimension {} but `{target}` has dimension {din}",
                self.din
            )));
        }
        for l in [&self.out_label, &self.env_label] {
            if s.has_label(l) && l != target {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        if self.out_label == self.env_label {
            return Err(Error::DuplicateLabel(self.out_label.clone()));
        }
        let tmp = "\u{0}dilated";
        let out = s.apply_operator(target, &self.v, tmp)?;
        out.split_system(tmp, &[(&self.out_label, self.dout), (&self.env_label, self.denv)])
    }
}

/// Views a pure tripartite state `psi` on `(a, b, e)` as the output of sending
/// half of a pure state on `(a, a_prime)` through an isometry `a_prime -> b (x) e`.
///
/// `dim(a_prime)` is the Schmidt rank across the `a : be` cut.
pub fn state_as_channel(
    psi: &LabeledState,
    a: &str,
    b: &str,
    e: &str,
    a_prime: &str,
) -> Result<(LabeledState, IsometricExtension)> {
    if !psi.is_pure() {
        return Err(Error::NotPure);
    }
    if psi.systems().len() != 3 {
        return Err(Error::InvalidParameter(
            "expected a state on exactly three systems".into(),
        ));
    }
    let ordered = psi.permute(&[a, b, e])?;
    let (da, db, de) = (ordered.dim_of(a)?, ordered.dim_of(b)?, ordered.dim_of(e)?);
    let v = ordered.vector().expect("pure");
    let m = CMatrix::from_row_slice(da, db * de, v.as_slice());
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s * s >= linalg::CLIP_THRESHOLD)
        .count()
        .max(1);
    let mut input = CVector::zeros(da * rank);
    let mut iso = CMatrix::zeros(db * de, rank);
    for k in 0..rank {
        let sigma = svd.singular_values[k];
        for x in 0..da {
            input[x * rank + k] = u[(x, k)] * c(sigma, 0.0);
        }
        for r in 0..db * de {
            iso[(r, k)] = vt[(k, r)];
        }
    }
    let input = LabeledState::pure_normalized(input, &[(a, da), (a_prime, rank)])?;
    let iso = IsometricExtension::new(iso, db, de, b, e)?;
    Ok((input, iso))
}
