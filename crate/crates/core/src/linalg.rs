//! Dense linear-algebra helpers shared by the engines.
//!
//! Matrices are stored as `nalgebra` dynamic matrices. The general complex
//! eigenproblem is delegated to `faer`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) < tol
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().sum()
}

/// Smallest eigenvalue of a Hermitian matrix (only the Hermitian part is used).
pub fn hermitian_min_eigenvalue(m: &CMatrix) -> f64 {
    let herm = (m + m.adjoint()).scale(0.5);
    herm.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, z| acc.min(*z))
}

pub fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, x| acc.min(*x))
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Eigenvalues and right eigenvectors (as columns, unit 2-norm) of a general
/// complex square matrix.
pub fn eig_general(m: &CMatrix) -> Result<(Vec<C64>, CMatrix)> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: m.ncols(),
        });
    }
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let a = faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    let evd = a.eigen().map_err(|_| Error::EigenFailure)?;
    let values: Vec<C64> = (0..n).map(|k| evd.S().column_vector()[k]).collect();
    let u = evd.U();
    let mut vectors = CMatrix::from_fn(n, n, |i, j| u[(i, j)]);
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
    if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure);
    }
    Ok((values, vectors))
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a real symmetric
/// matrix.
pub fn symmetric_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_eigenpairs_satisfy_definition() {
        let m = CMatrix::from_fn(4, 4, |i, j| c((i * 4 + j) as f64 * 0.1, i as f64 - j as f64));
        let (vals, vecs) = eig_general(&m).unwrap();
        for k in 0..4 {
            let v = vecs.column(k);
            let r = &m * v - v * vals[k];
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
    }

    #[test]
    fn symmetric_eigen_is_sorted() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 1.0]);
        let (vals, vecs) = symmetric_eigen_sorted(&m);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let recon = &vecs * DMatrix::from_diagonal(&DVector::from_vec(vals)) * vecs.transpose();
        assert!((recon - m).abs().max() < 1e-12);
    }

    #[test]
    fn hermitian_min() {
        let m = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, -2.0), c(0.0, 2.0), c(1.0, 0.0)]);
        assert!((hermitian_min_eigenvalue(&m) + 1.0).abs() < 1e-12);
    }
}
