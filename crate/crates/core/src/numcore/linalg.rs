//! SVD-backed rank, kernels and orthonormal bases (real and complex).

use num_complex::Complex64;

use super::svd::{kernel, range, rank_against, singular_values};
use crate::matrix::{CMatrix, Matrix};

/// Number of singular values above `rank_tol * σ_max`.
pub fn numerical_rank(m: &Matrix, rank_tol: f64) -> usize {
    numerical_rank_scaled(m, rank_tol, 0.0)
}

/// Rank measured against `scale` as well as `σ_max`, for matrices that may be
/// numerically zero relative to the problem they came from.
pub(crate) fn numerical_rank_scaled(m: &Matrix, rank_tol: f64, scale: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    rank_against(&singular_values(m), rank_tol, scale)
}

/// Orthonormal basis (as columns) of the numerical null space; zero columns when full rank.
pub fn kernel_basis(m: &Matrix, rank_tol: f64) -> Matrix {
    kernel(m, rank_tol, 0.0)
}

/// [`kernel_basis`] with rank judged as in [`numerical_rank_scaled`].
pub(crate) fn kernel_basis_scaled(m: &Matrix, rank_tol: f64, scale: f64) -> Matrix {
    kernel(m, rank_tol, scale)
}

/// Orthonormal basis of the column span.
pub fn range_basis(m: &Matrix, rank_tol: f64) -> Matrix {
    range(m, rank_tol)
}

/// Orthonormal basis of the complex null space.
pub fn complex_kernel_basis(m: &CMatrix, rank_tol: f64) -> CMatrix {
    kernel(m, rank_tol, 0.0)
}

/// Orthonormal basis of a complex column span.
pub fn complex_range_basis(m: &CMatrix, rank_tol: f64) -> CMatrix {
    range(m, rank_tol)
}

pub(crate) fn to_complex(m: &Matrix) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Smallest over largest singular value; 0 for a zero matrix.
pub fn inverse_condition(m: &Matrix) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&smax), Some(&smin)) if smax > 0.0 => smin / smax,
        _ => 0.0,
    }
}

pub(crate) fn mat_pow(m: &Matrix, n: usize) -> Matrix {
    let d = m.nrows();
    let mut out = Matrix::identity(d, d);
    for _ in 0..n {
        out = &out * m;
    }
    out
}
