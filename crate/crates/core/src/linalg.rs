//! Dense complex linear algebra helpers shared by the state and channel code.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for Hermiticity, trace, norm and positivity checks.
pub const STATE_TOL: f64 = 1e-9;
/// Eigenvalues below this (and not below `-STATE_TOL`) are treated as zero.
pub const CLIP_THRESHOLD: f64 = 1e-12;
pub const DEFAULT_DIM_CAP: usize = 4096;

static DIM_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIM_CAP);

/// Largest density-matrix side length any operation may build.
pub fn dim_cap() -> usize {
    DIM_CAP.load(Ordering::Relaxed)
}

pub fn set_dim_cap(cap: usize) {
    DIM_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// Density operators are capped at `dim_cap()` per side; pure vectors may be
/// as long as a capped matrix has entries.
pub fn check_matrix_dim(required: usize) -> Result<()> {
    let cap = dim_cap();
    if required > cap {
        return Err(Error::DimensionCap { required, cap });
    }
    Ok(())
}

pub fn check_vector_dim(required: usize) -> Result<()> {
    let cap = dim_cap();
    if required > cap.saturating_mul(cap) {
        return Err(Error::DimensionCap {
            required,
            cap: cap.saturating_mul(cap),
        });
    }
    Ok(())
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry of `(M - M^dagger) / 2` in absolute value.
pub fn anti_hermitian_norm(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm() * 0.5;
            worst = worst.max(d);
        }
    }
    worst
}

pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues sorted descending with
/// eigenvectors as matching columns.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let skew = anti_hermitian_norm(m);
    if skew > STATE_TOL {
        return Err(Error::NotHermitian(skew));
    }
    let n = m.nrows();
    if n == 1 {
        return Ok((alloc::vec![m[(0, 0)].re], CMatrix::identity(1, 1)));
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let skew = anti_hermitian_norm(m);
    if skew > STATE_TOL {
        return Err(Error::NotHermitian(skew));
    }
    let mut values: Vec<f64> = if m.nrows() == 1 {
        alloc::vec![m[(0, 0)].re]
    } else {
        symmetrize(m).symmetric_eigenvalues().iter().copied().collect()
    };
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `exp(iH)` for Hermitian `H`, exactly unitary up to rounding.
pub fn expm_i_hermitian(h: &CMatrix) -> Result<CMatrix> {
    let (values, vectors) = hermitian_eigen(h)?;
    let n = values.len();
    let phases = CMatrix::from_fn(n, n, |r, k| {
        if r == k {
            let (s, co) = libm::sincos(values[k]);
            c(co, s)
        } else {
            C64::default()
        }
    });
    Ok(&vectors * phases * vectors.adjoint())
}

/// Hermitian matrix from `n*n` real parameters: `n` diagonal entries followed by
/// `(re, im)` pairs for the strict upper triangle in row-major order.
pub fn hermitian_from_params(n: usize, params: &[f64]) -> CMatrix {
    debug_assert_eq!(params.len(), n * n);
    let mut h = CMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = c(params[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = c(params[k], params[k + 1]);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
            k += 2;
        }
    }
    h
}

/// Sum of singular values.
pub fn nuclear_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

/// Index map for reordering tensor factors. `order[k]` names the old factor placed
/// at new position `k`; the result maps each new flat index to its old flat index.
/// The first factor is the most significant digit.
pub fn permutation_index_map(dims: &[usize], order: &[usize]) -> Vec<usize> {
    let m = dims.len();
    let mut old_strides = alloc::vec![1usize; m];
    for k in (0..m.saturating_sub(1)).rev() {
        old_strides[k] = old_strides[k + 1] * dims[k + 1];
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let total: usize = dims.iter().product();
    let mut map = Vec::with_capacity(total);
    let mut digits = alloc::vec![0usize; m];
    for _ in 0..total {
        let old: usize = digits.iter().zip(order).map(|(&d, &o)| d * old_strides[o]).sum();
        map.push(old);
        for k in (0..m).rev() {
            digits[k] += 1;
            if digits[k] < new_dims[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermitian_eigen_reconstructs() {
        let h = hermitian_from_params(3, &[0.3, -1.0, 0.5, 0.2, 0.7, -0.4, 0.1, 0.9, -0.6]);
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        assert!(vals.windows(2).all(|w| w[0] >= w[1]));
        let d = CMatrix::from_fn(3, 3, |r, k| if r == k { c(vals[k], 0.0) } else { c(0.0, 0.0) });
        let back = &vecs * d * vecs.adjoint();
        assert!(max_abs_diff(&back, &h) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(hermitian_eigen(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn exponential_is_unitary() {
        let params: Vec<f64> = (0..16).map(|k| ((k * 7 % 5) as f64 - 2.0) * 0.37).collect();
        let u = expm_i_hermitian(&hermitian_from_params(4, &params)).unwrap();
        let id = CMatrix::identity(4, 4);
        assert!(max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn permutation_map_swaps_two_factors() {
        // dims (2,3): new order (1,0) so new index (j,i) maps to old (i,j)
        let map = permutation_index_map(&[2, 3], &[1, 0]);
        assert_eq!(map, alloc::vec![0, 3, 1, 4, 2, 5]);
    }
}
