//! Labeled multipartite states: construction, tensor products, marginals,
//! spectra, entropies and distances.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{
    self, c, check_matrix_dim, check_vector_dim, hermitian_eigen, hermitian_eigenvalues, permutation_index_map,
    CMatrix, CVector, C64, CLIP_THRESHOLD, STATE_TOL,
};

/// One tensor factor of a state.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: label.into(),
            dim,
        }
    }
}

#[derive(Debug, Clone)]
enum Data {
    Pure(CVector),
    Mixed(CMatrix),
}

/// A density operator or state vector over an ordered list of labeled subsystems.
///
/// The first subsystem is the most significant tensor factor. States are
/// immutable; every operation returns a new state.
#[derive(Debug, Clone)]
pub struct LabeledState {
    data: Data,
    systems: Vec<Subsystem>,
}

/// Eigenvalues of a density operator after clipping numerical noise to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted descending, all entries non-negative.
    pub eigenvalues: Vec<f64>,
    /// Number of eigenvalues in `[-1e-9, 1e-12)` that were set to zero.
    pub clipped: usize,
}

impl Spectrum {
    pub fn from_eigenvalues(mut raw: Vec<f64>) -> Result<Self> {
        raw.sort_by(|a, b| b.total_cmp(a));
        let min = raw.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::NotPositive(min));
        }
        let mut clipped = 0;
        for v in raw.iter_mut() {
            if *v < CLIP_THRESHOLD {
                if *v != 0.0 {
                    clipped += 1;
                }
                *v = 0.0;
            }
        }
        Ok(Self {
            eigenvalues: raw,
            clipped,
        })
    }

    /// Shannon entropy of the spectrum in bits.
    pub fn entropy(&self) -> f64 {
        shannon_entropy(&self.eigenvalues)
    }
}

/// `-sum p log2 p` with the same clipping as state spectra.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    let h: f64 = probs
        .iter()
        .filter(|&&p| p >= CLIP_THRESHOLD)
        .map(|&p| -p * libm::log2(p))
        .sum();
    h.max(0.0)
}

fn validate_systems(systems: &[Subsystem]) -> Result<usize> {
    for (i, s) in systems.iter().enumerate() {
        if s.dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "subsystem `{}` has dimension 0",
                s.label
            )));
        }
        if systems[..i].iter().any(|t| t.label == s.label) {
            return Err(Error::DuplicateLabel(s.label.clone()));
        }
    }
    Ok(systems.iter().map(|s| s.dim).product())
}

fn to_systems(systems: &[(&str, usize)]) -> Vec<Subsystem> {
    systems.iter().map(|&(l, d)| Subsystem::new(l, d)).collect()
}

impl LabeledState {
    /// State vector; its norm must be 1 within `1e-9`.
    pub fn pure(vector: CVector, systems: &[(&str, usize)]) -> Result<Self> {
        Self::pure_with(vector, to_systems(systems))
    }

    pub fn pure_with(vector: CVector, systems: Vec<Subsystem>) -> Result<Self> {
        let dim = validate_systems(&systems)?;
        if vector.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} but subsystem dimensions multiply to {dim}",
                vector.len()
            )));
        }
        check_vector_dim(dim)?;
        let norm = vector.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::BadNorm(norm));
        }
        Ok(Self {
            data: Data::Pure(vector),
            systems,
        })
    }

    /// Normalizes `vector` before building the state.
    pub fn pure_normalized(vector: CVector, systems: &[(&str, usize)]) -> Result<Self> {
        let norm = vector.norm();
        if norm < 1e-300 {
            return Err(Error::BadNorm(norm));
        }
        Self::pure(vector.unscale(norm), systems)
    }

    /// Density operator; must be Hermitian, unit trace and PSD within `1e-9`.
    pub fn mixed(matrix: CMatrix, systems: &[(&str, usize)]) -> Result<Self> {
        Self::mixed_with(matrix, to_systems(systems))
    }

    pub fn mixed_with(matrix: CMatrix, systems: Vec<Subsystem>) -> Result<Self> {
        let dim = validate_systems(&systems)?;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix but subsystem dimensions multiply to {dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        check_matrix_dim(dim)?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::BadTrace(tr.re));
        }
        let values = hermitian_eigenvalues(&matrix)?;
        let min = values.last().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(Self {
            data: Data::Mixed(linalg::symmetrize(&matrix)),
            systems,
        })
    }

    /// Internal constructor for results of operations that preserve validity.
    pub(crate) fn from_vector_unchecked(vector: CVector, systems: Vec<Subsystem>) -> Self {
        debug_assert_eq!(vector.len(), systems.iter().map(|s| s.dim).product::<usize>());
        Self {
            data: Data::Pure(vector),
            systems,
        }
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix, systems: Vec<Subsystem>) -> Self {
        debug_assert_eq!(matrix.nrows(), systems.iter().map(|s| s.dim).product::<usize>());
        Self {
            data: Data::Mixed(matrix),
            systems,
        }
    }

    /// Computational basis vector `|index>`.
    pub fn basis(label: &str, dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} >= dimension {dim}"
            )));
        }
        let mut v = CVector::zeros(dim);
        v[index] = c(1.0, 0.0);
        Self::pure(v, &[(label, dim)])
    }

    pub fn maximally_mixed(label: &str, dim: usize) -> Result<Self> {
        check_matrix_dim(dim)?;
        let m = CMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0);
        Self::mixed(m, &[(label, dim)])
    }

    /// `sum_i |ii> / sqrt(d)` on `(a, b)`.
    pub fn maximally_entangled(a: &str, b: &str, dim: usize) -> Result<Self> {
        let mut v = CVector::zeros(dim * dim);
        let amp = 1.0 / libm::sqrt(dim as f64);
        for i in 0..dim {
            v[i * dim + i] = c(amp, 0.0);
        }
        Self::pure(v, &[(a, dim), (b, dim)])
    }

    pub fn systems(&self) -> &[Subsystem] {
        &self.systems
    }

    pub fn labels(&self) -> Vec<&str> {
        self.systems.iter().map(|s| s.label.as_str()).collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.systems.iter().map(|s| s.dim).collect()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.systems.iter().map(|s| s.dim).product()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, Data::Pure(_))
    }

    pub fn vector(&self) -> Option<&CVector> {
        match &self.data {
            Data::Pure(v) => Some(v),
            Data::Mixed(_) => None,
        }
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.systems.iter().any(|s| s.label == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.systems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.systems[self.index_of(label)?].dim)
    }

    /// Density operator, building `|v><v|` for pure states.
    pub fn density(&self) -> CMatrix {
        match &self.data {
            Data::Pure(v) => v * v.adjoint(),
            Data::Mixed(m) => m.clone(),
        }
    }

    /// The same state held as a density operator.
    pub fn to_mixed(&self) -> Result<Self> {
        match &self.data {
            Data::Mixed(_) => Ok(self.clone()),
            Data::Pure(v) => {
                check_matrix_dim(v.len())?;
                Ok(Self::from_matrix_unchecked(v * v.adjoint(), self.systems.clone()))
            }
        }
    }

    /// Kronecker product with `other`'s systems appended after ours.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if let Some(dup) = other.systems.iter().find(|s| self.has_label(&s.label)) {
            return Err(Error::DuplicateLabel(dup.label.clone()));
        }
        let mut systems = self.systems.clone();
        systems.extend(other.systems.iter().cloned());
        let dim = self.dim() * other.dim();
        match (&self.data, &other.data) {
            (Data::Pure(a), Data::Pure(b)) => {
                check_vector_dim(dim)?;
                Ok(Self::from_vector_unchecked(linalg::kron_vec(a, b), systems))
            }
            _ => {
                check_matrix_dim(dim)?;
                Ok(Self::from_matrix_unchecked(
                    linalg::kron(&self.density(), &other.density()),
                    systems,
                ))
            }
        }
    }

    fn order_of(&self, labels: &[&str]) -> Result<Vec<usize>> {
        let order = labels.iter().map(|l| self.index_of(l)).collect::<Result<Vec<_>>>()?;
        for (i, o) in order.iter().enumerate() {
            if order[..i].contains(o) {
                return Err(Error::DuplicateLabel(labels[i].to_string()));
            }
        }
        Ok(order)
    }

    fn permute_by_index(&self, order: &[usize]) -> Self {
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self.clone();
        }
        let map = permutation_index_map(&self.dims(), order);
        let systems = order.iter().map(|&o| self.systems[o].clone()).collect();
        match &self.data {
            Data::Pure(v) => Self::from_vector_unchecked(CVector::from_fn(map.len(), |i, _| v[map[i]]), systems),
            Data::Mixed(m) => {
                let n = map.len();
                Self::from_matrix_unchecked(CMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]), systems)
            }
        }
    }

    /// Reorders the tensor factors to `new_order`, which must list every label once.
    pub fn permute(&self, new_order: &[&str]) -> Result<Self> {
        if new_order.len() != self.systems.len() {
            return Err(Error::NotAPermutation(new_order.join(",")));
        }
        let order = self.order_of(new_order).map_err(|e| match e {
            Error::UnknownLabel(_) | Error::DuplicateLabel(_) => Error::NotAPermutation(new_order.join(",")),
            other => other,
        })?;
        Ok(self.permute_by_index(&order))
    }

    /// Moves the named systems to the front (in the given order), keeping the rest in place order.
    pub fn front(&self, labels: &[&str]) -> Result<Self> {
        let mut order = self.order_of(labels)?;
        for i in 0..self.systems.len() {
            if !order.contains(&i) {
                order.push(i);
            }
        }
        Ok(self.permute_by_index(&order))
    }

    /// Reduced state on `keep`, in this state's label order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self> {
        let mut idx = self.order_of(keep)?;
        idx.sort_unstable();
        if idx.len() == self.systems.len() {
            return Ok(self.clone());
        }
        let mut order = idx.clone();
        order.extend((0..self.systems.len()).filter(|i| !idx.contains(i)));
        let kept: Vec<Subsystem> = idx.iter().map(|&i| self.systems[i].clone()).collect();
        let k: usize = kept.iter().map(|s| s.dim).product();
        let r = self.dim() / k;
        check_matrix_dim(k)?;
        let permuted = self.permute_by_index(&order);
        let reduced = match &permuted.data {
            Data::Pure(v) => {
                let m = CMatrix::from_row_slice(k, r, v.as_slice());
                &m * m.adjoint()
            }
            Data::Mixed(m) => CMatrix::from_fn(k, k, |i, j| (0..r).map(|t| m[(i * r + t, j * r + t)]).sum::<C64>()),
        };
        Ok(Self::from_matrix_unchecked(reduced, kept))
    }

    /// Renames every label through `rename`.
    pub fn relabel(&self, rename: impl Fn(&str) -> String) -> Result<Self> {
        let systems: Vec<Subsystem> = self
            .systems
            .iter()
            .map(|s| Subsystem::new(rename(&s.label), s.dim))
            .collect();
        validate_systems(&systems)?;
        Ok(Self {
            data: self.data.clone(),
            systems,
        })
    }

    /// Copy-indexed labels, e.g. `A1` becomes `A1#3`.
    pub fn with_copy_index(&self, copy: usize) -> Result<Self> {
        self.relabel(|l| format!("{l}#{copy}"))
    }

    /// Fuses adjacent systems `labels` (in the given order) into one system `new_label`.
    pub fn merge_systems(&self, labels: &[&str], new_label: &str) -> Result<Self> {
        let idx = self.order_of(labels)?;
        if idx.is_empty() || idx.windows(2).any(|w| w[1] != w[0] + 1) {
            return Err(Error::InvalidParameter(format!(
                "systems {} are not adjacent and in order",
                labels.join(",")
            )));
        }
        let dim = idx.iter().map(|&i| self.systems[i].dim).product();
        let mut systems = Vec::with_capacity(self.systems.len() - idx.len() + 1);
        for (i, s) in self.systems.iter().enumerate() {
            if i == idx[0] {
                systems.push(Subsystem::new(new_label, dim));
            } else if !idx.contains(&i) {
                systems.push(s.clone());
            }
        }
        validate_systems(&systems)?;
        Ok(Self {
            data: self.data.clone(),
            systems,
        })
    }

    /// Splits system `label` into consecutive factors `parts` whose dimensions
    /// multiply to its dimension. The data layout is unchanged.
    pub fn split_system(&self, label: &str, parts: &[(&str, usize)]) -> Result<Self> {
        let i = self.index_of(label)?;
        let prod: usize = parts.iter().map(|p| p.1).product();
        if prod != self.systems[i].dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot split `{label}` of dimension {} into parts of total dimension {prod}",
                self.systems[i].dim
            )));
        }
        let mut systems = self.systems[..i].to_vec();
        systems.extend(parts.iter().map(|&(l, d)| Subsystem::new(l, d)));
        systems.extend(self.systems[i + 1..].iter().cloned());
        validate_systems(&systems)?;
        Ok(Self {
            data: self.data.clone(),
            systems,
        })
    }

    /// Isometrically embeds system `label` into a space of dimension `new_dim`
    /// (old basis vectors become the first ones).
    pub fn embed(&self, label: &str, new_dim: usize) -> Result<Self> {
        let i = self.index_of(label)?;
        let old = self.systems[i].dim;
        if new_dim < old {
            return Err(Error::InvalidParameter(format!(
                "cannot embed dimension {old} into {new_dim}"
            )));
        }
        let mut e = CMatrix::zeros(new_dim, old);
        for k in 0..old {
            e[(k, k)] = c(1.0, 0.0);
        }
        let out = self.apply_operator(label, &e, label)?;
        Ok(out)
    }

    /// Applies an operator `op` (shape `dout x din`) to system `target`, renaming it
    /// to `new_label`. Valid only for isometries; callers guarantee that.
    pub(crate) fn apply_operator(&self, target: &str, op: &CMatrix, new_label: &str) -> Result<Self> {
        let i = self.index_of(target)?;
        let din = self.systems[i].dim;
        if op.ncols() != din {
            return Err(Error::DimensionMismatch(format!(
                "operator acts on dimension {} but `{target}` has dimension {din}",
                op.ncols()
            )));
        }
        if new_label != target && self.has_label(new_label) {
            return Err(Error::DuplicateLabel(new_label.to_string()));
        }
        let dout = op.nrows();
        let front = self.front(&[target])?;
        let rest = self.dim() / din;
        let mut systems = front.systems.clone();
        systems[0] = Subsystem::new(new_label, dout);
        let moved = match &front.data {
            Data::Pure(v) => {
                check_vector_dim(dout * rest)?;
                let m = CMatrix::from_row_slice(din, rest, v.as_slice());
                let out = op * m;
                Self::from_vector_unchecked(CVector::from_row_slice(out.transpose().as_slice()), systems)
            }
            Data::Mixed(m) => {
                check_matrix_dim(dout * rest)?;
                let big = linalg::kron(op, &CMatrix::identity(rest, rest));
                Self::from_matrix_unchecked(&big * m * big.adjoint(), systems)
            }
        };
        let mut back: Vec<String> = Vec::with_capacity(self.systems.len());
        for (k, s) in self.systems.iter().enumerate() {
            back.push(if k == i { new_label.to_string() } else { s.label.clone() });
        }
        let back_refs: Vec<&str> = back.iter().map(String::as_str).collect();
        moved.permute(&back_refs)
    }

    /// Applies a unitary to the joint factor of `labels` (in that order).
    pub fn apply_unitary(&self, labels: &[&str], u: &CMatrix) -> Result<Self> {
        let d: usize = labels.iter().map(|l| self.dim_of(l)).product::<Result<usize>>()?;
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} unitary on systems of total dimension {d}",
                u.nrows(),
                u.ncols()
            )));
        }
        let original: Vec<String> = self.systems.iter().map(|s| s.label.clone()).collect();
        let front = self.front(labels)?;
        let merged = front.merge_systems(labels, "\u{0}joint")?;
        // the joint factor is first, so the unsplit layout matches `front`
        let applied = merged.apply_operator("\u{0}joint", u, "\u{0}joint")?;
        let restored = Self {
            data: applied.data,
            systems: front.systems,
        };
        let refs: Vec<&str> = original.iter().map(String::as_str).collect();
        restored.permute(&refs)
    }

    /// Clipped spectrum of the full state.
    pub fn spectrum(&self) -> Result<Spectrum> {
        match &self.data {
            Data::Pure(_) => {
                let mut values = alloc::vec![0.0; self.dim()];
                values[0] = 1.0;
                Ok(Spectrum {
                    eigenvalues: values,
                    clipped: 0,
                })
            }
            Data::Mixed(m) => Spectrum::from_eigenvalues(hermitian_eigenvalues(m)?),
        }
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        match &self.data {
            Data::Pure(_) => Ok(0.0),
            Data::Mixed(m) => Ok(Spectrum::from_eigenvalues(hermitian_eigenvalues(m)?)?.entropy()),
        }
    }

    /// Entropy of the marginal on `labels`. For pure states the smaller of the
    /// marginal and its complement is diagonalized.
    pub fn marginal_entropy(&self, labels: &[&str]) -> Result<f64> {
        if let Data::Pure(_) = self.data {
            let keep = self.order_of(labels)?;
            let kdim: usize = keep.iter().map(|&i| self.systems[i].dim).product();
            let rest_dim = self.dim() / kdim;
            if rest_dim < kdim {
                let complement: Vec<&str> = self
                    .systems
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !keep.contains(i))
                    .map(|(_, s)| s.label.as_str())
                    .collect();
                return self.partial_trace(&complement)?.von_neumann_entropy();
            }
        }
        self.partial_trace(labels)?.von_neumann_entropy()
    }

    fn check_same_systems(&self, other: &Self) -> Result<()> {
        if self.systems != other.systems {
            return Err(Error::DimensionMismatch(format!(
                "systems {:?} vs {:?}",
                self.systems, other.systems
            )));
        }
        Ok(())
    }

    /// `|<a|b>|^2` for pure states.
    pub fn overlap(&self, other: &Self) -> Result<f64> {
        self.check_same_systems(other)?;
        match (&self.data, &other.data) {
            (Data::Pure(a), Data::Pure(b)) => Ok(a.dotc(b).norm_sqr()),
            _ => Err(Error::NotPure),
        }
    }

    /// Purification with a fresh environment of dimension `rank(self)`.
    pub fn purify(&self, env_label: &str) -> Result<Self> {
        if self.has_label(env_label) {
            return Err(Error::DuplicateLabel(env_label.to_string()));
        }
        match &self.data {
            Data::Pure(_) => self.tensor(&Self::basis(env_label, 1, 0)?),
            Data::Mixed(m) => {
                let (values, vectors) = hermitian_eigen(m)?;
                let min = values.last().copied().unwrap_or(0.0);
                if min < -STATE_TOL {
                    return Err(Error::NotPositive(min));
                }
                let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i] >= CLIP_THRESHOLD).collect();
                let r = kept.len().max(1);
                let d = self.dim();
                check_vector_dim(d * r)?;
                let total: f64 = kept.iter().map(|&i| values[i]).sum();
                let mut v = CVector::zeros(d * r);
                for (slot, &i) in kept.iter().enumerate() {
                    let amp = libm::sqrt(values[i] / total);
                    for s in 0..d {
                        v[s * r + slot] = vectors[(s, i)] * amp;
                    }
                }
                let mut systems = self.systems.clone();
                systems.push(Subsystem::new(env_label, r));
                Ok(Self::from_vector_unchecked(v, systems))
            }
        }
    }

    /// Partial transpose on `labels`, as a raw matrix (not necessarily a state).
    pub fn partial_transpose(&self, labels: &[&str]) -> Result<CMatrix> {
        let idx = self.order_of(labels)?;
        Ok(partial_transpose_matrix(&self.density(), &self.dims(), &idx))
    }
}

/// Transposes the tensor factors listed in `which` of an operator on `dims`.
pub fn partial_transpose_matrix(m: &CMatrix, dims: &[usize], which: &[usize]) -> CMatrix {
    let n = m.nrows();
    let k = dims.len();
    let mut strides = alloc::vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let digit = |x: usize, i: usize| (x / strides[i]) % dims[i];
    CMatrix::from_fn(n, n, |r, col| {
        let (mut rr, mut cc) = (r, col);
        for &i in which {
            let (dr, dc) = (digit(r, i), digit(col, i));
            rr = rr - dr * strides[i] + dc * strides[i];
            cc = cc - dc * strides[i] + dr * strides[i];
        }
        m[(rr, cc)]
    })
}

/// Half the trace norm of `a - b`, clamped to `[0, 1]`.
pub fn trace_distance(a: &LabeledState, b: &LabeledState) -> Result<f64> {
    a.check_same_systems(b)?;
    let d = match (&a.data, &b.data) {
        (Data::Pure(x), Data::Pure(y)) => libm::sqrt((1.0 - x.dotc(y).norm_sqr()).max(0.0)),
        _ => {
            let diff = a.density() - b.density();
            0.5 * hermitian_eigenvalues(&diff)?.iter().map(|v| v.abs()).sum::<f64>()
        }
    };
    Ok(d.clamp(0.0, 1.0))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(s: &LabeledState) -> Result<f64> {
    s.von_neumann_entropy()
}
