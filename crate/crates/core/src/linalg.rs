//! Thin wrappers over dense complex linear algebra.

use std::sync::OnceLock;

use ndarray::prelude::*;
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Some ndarray-linalg versions hand a row-major complex matrix to LAPACK as
/// its transpose, which for Hermitian input means the conjugate: the returned
/// eigenvectors then belong to conj(H). Detect that once with a known 2x2
/// case and compensate.
fn lapack_returns_conjugated_vectors() -> bool {
    static FLAG: OnceLock<bool> = OnceLock::new();
    *FLAG.get_or_init(|| {
        let mut h = Array2::<C64>::zeros((2, 2));
        h[(0, 1)] = C64::i();
        h[(1, 0)] = -C64::i();
        let (vals, vecs) = h
            .eigh(UPLO::Lower)
            .expect("eigh failed on a 2x2 Hermitian matrix");
        let v = vecs.column(0).to_owned();
        let res: f64 = (h.dot(&v) - v.mapv(|z| z * C64::new(vals[0], 0.0)))
            .iter()
            .map(|z| z.norm())
            .sum();
        res > 1e-8
    })
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending, columns of
/// the returned matrix are the corresponding eigenvectors.
pub fn eigh(matrix: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let owned;
    let std_layout = if matrix.is_standard_layout() {
        matrix
    } else {
        owned = matrix.as_standard_layout().to_owned();
        &owned
    };
    let (vals, mut vecs) = std_layout
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Eigen(e.to_string()))?;
    if lapack_returns_conjugated_vectors() {
        vecs.mapv_inplace(|z| z.conj());
    }
    Ok((vals, vecs))
}

/// Largest absolute entry of a complex matrix.
pub fn max_abs(matrix: &Array2<C64>) -> f64 {
    matrix.iter().fold(0.0, |m, z| m.max(z.norm()))
}

/// Largest entry of |M - M^dag|.
pub fn hermiticity_deviation(matrix: &Array2<C64>) -> f64 {
    let n = matrix.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((matrix[(i, j)] - matrix[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Conjugate transpose.
pub fn adjoint(matrix: &Array2<C64>) -> Array2<C64> {
    let mut out = matrix.t().mapv(|z| z.conj());
    if !out.is_standard_layout() {
        out = out.as_standard_layout().to_owned();
    }
    out
}
