//! Thin helpers over `nalgebra` for the small symmetric systems used in pooling.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor applied by [`psd_repair`].
pub const EIGEN_FLOOR: f64 = 1e-10;

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetrize, then floor the spectrum at `EIGEN_FLOOR * max eigenvalue` and
/// reconstruct. Matrices that are already comfortably positive definite come
/// back unchanged up to rounding.
pub fn psd_repair(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let sym = symmetrize(m);
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::NotPositiveDefinite);
    }
    let eig = SymmetricEigen::new(sym.clone());
    let max = eig.eigenvalues.max();
    if !(max > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let floor = EIGEN_FLOOR * max;
    if eig.eigenvalues.min() >= floor {
        return Ok(sym);
    }
    let clamped = eig.eigenvalues.map(|l| l.max(floor));
    let rebuilt =
        &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    Ok(symmetrize(&rebuilt))
}

/// Cholesky factorization of a symmetric positive definite matrix.
pub(crate) struct SpdSolver {
    chol: Cholesky<f64, Dyn>,
}

impl SpdSolver {
    pub fn new(m: &DMatrix<f64>) -> Result<Self> {
        Cholesky::new(m.clone())
            .map(|chol| SpdSolver { chol })
            .ok_or(Error::NotPositiveDefinite)
    }

    pub fn solve(&self, b: &DVector<f64>) -> DVector<f64> {
        self.chol.solve(b)
    }
}

pub(crate) fn quad_form(m: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += x[i] * m[(i, j)] * x[j];
        }
    }
    acc
}
