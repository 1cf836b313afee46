//! Real Jordan decomposition from rank chains and explicit Jordan chains.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LinflowError, Result};
use crate::matrix::{block_diag, jordan_complex_block, jordan_real_block, spectral_norm, GeneratorMatrix, Matrix};
use crate::numcore::{
    block_sizes, eigenvalues, inverse_condition, kernel, kernel_basis_scaled, rank_against, shifted, to_complex,
    top_directions, Scalar,
};
use crate::tolerance::ToleranceProfile;

/// One real Jordan block `J_m(z)`; `z.im ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealJordanBlock {
    pub z: Complex64,
    pub m: usize,
    pub real_size: usize,
}

impl RealJordanBlock {
    pub fn new(z: Complex64, m: usize) -> Self {
        let z = if z.im < 0.0 { z.conj() } else { z };
        let real_size = if z.im == 0.0 { m } else { 2 * m };
        RealJordanBlock { z, m, real_size }
    }

    pub fn is_real(&self) -> bool {
        self.z.im == 0.0
    }

    /// The block as a `real_size × real_size` matrix.
    pub fn matrix(&self) -> Matrix {
        if self.is_real() {
            jordan_real_block(self.m, self.z.re)
        } else {
            jordan_complex_block(self.m, self.z.re, self.z.im)
        }
    }
}

/// `A P = P J` with `J` block diagonal in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealJordanDecomposition {
    pub blocks: Vec<RealJordanBlock>,
    /// Change of basis `P`; its columns are grouped by block.
    pub basis: Matrix,
    pub inverse: Matrix,
    /// `‖AP − PJ‖ / ((1 + ‖A‖)‖P‖)`.
    pub residual: f64,
    /// Spectral condition number of `P`.
    pub condition: f64,
}

impl RealJordanDecomposition {
    pub fn jordan_matrix(&self) -> Matrix {
        let parts: Vec<Matrix> = self.blocks.iter().map(|b| b.matrix()).collect();
        block_diag(&parts)
    }

    /// Column offset of each block in `basis`.
    pub fn offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = off;
                off += b.real_size;
                o
            })
            .collect()
    }

    /// Columns of `basis` belonging to blocks selected by `keep`.
    pub fn columns_where(&self, keep: impl Fn(&RealJordanBlock) -> bool) -> Matrix {
        let d = self.basis.nrows();
        let mut cols: Vec<usize> = Vec::new();
        for (b, o) in self.blocks.iter().zip(self.offsets()) {
            if keep(b) {
                cols.extend(o..o + b.real_size);
            }
        }
        Matrix::from_fn(d, cols.len(), |i, j| self.basis[(i, cols[j])])
    }
}

fn orthonormal<T: Scalar>(s: &DMatrix<T>, tol: f64) -> DMatrix<T> {
    if s.ncols() == 0 {
        return s.clone();
    }
    let svd = T::svd(s);
    let rank = rank_against(&svd.s, tol, 0.0);
    svd.u.columns(0, rank).into_owned()
}

/// Jordan chains of `M` (nilpotent on its generalized kernel) for the given
/// block sizes; each chain is `(M^{s-1}v, …, Mv, v)`.
fn jordan_chains<T: Scalar>(
    m: &DMatrix<T>,
    sizes: &[usize],
    rank_tol: f64,
    scale: f64,
) -> Result<Vec<Vec<DMatrix<T>>>> {
    let d = m.nrows();
    let top = sizes.iter().cloned().max().unwrap_or(0);
    let mut kernels: Vec<DMatrix<T>> = vec![DMatrix::zeros(d, 0)];
    let mut power = DMatrix::<T>::identity(d, d);
    for n in 1..=top {
        power = &power * m;
        kernels.push(kernel(&power, rank_tol, scale.powi(n as i32)));
    }
    let mut heads: Vec<(usize, DMatrix<T>)> = Vec::new();
    for n in (1..=top).rev() {
        let need = sizes.iter().filter(|&&s| s == n).count();
        if need == 0 {
            continue;
        }
        let mut span: Vec<DMatrix<T>> = Vec::new();
        let below = &kernels[n - 1];
        for j in 0..below.ncols() {
            span.push(below.columns(j, 1).into_owned());
        }
        for (s, v) in &heads {
            let mut w = v.clone();
            for _ in 0..(s - n) {
                w = m * w;
            }
            span.push(w);
        }
        let wn = &kernels[n];
        let proj = if span.is_empty() {
            wn.clone()
        } else {
            let cols: Vec<_> = span.iter().map(|c| c.column(0)).collect();
            let s = orthonormal(&DMatrix::from_columns(&cols), rank_tol);
            wn - &s * (s.adjoint() * wn)
        };
        let (fresh, weakest) = top_directions(&proj, need);
        if !(weakest > rank_tol.sqrt()) {
            return Err(LinflowError::numerical(
                "real_jordan",
                format!("could not extend Jordan chains at height {n}"),
            ));
        }
        for j in 0..need {
            heads.push((n, fresh.columns(j, 1).into_owned()));
        }
    }
    let mut chains = Vec::new();
    for (s, v) in heads {
        let mut chain = vec![v];
        for _ in 1..s {
            let next = m * chain.last().unwrap();
            chain.push(next);
        }
        chain.reverse();
        let scale = chain.iter().map(|c| c.norm()).fold(0.0, f64::max);
        for c in chain.iter_mut() {
            *c /= T::from_real(scale);
        }
        chains.push(chain);
    }
    Ok(chains)
}

/// Real Jordan decomposition of `A`.
pub fn real_jordan(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<RealJordanDecomposition> {
    let am = a.matrix();
    let d = a.dim();
    let spec = eigenvalues(a, tol)?;
    let norm = a.norm();
    let mut pieces: Vec<(RealJordanBlock, Matrix)> = Vec::new();
    for c in spec.clusters() {
        let sizes = block_sizes(am, c.value, c.multiplicity, tol.rank_tol).ok_or_else(|| {
            LinflowError::numerical(
                "real_jordan",
                format!(
                    "rank chain at eigenvalue {} is inconsistent with multiplicity {}; try loosening eig_cluster_tol or rank_tol",
                    c.value, c.multiplicity
                ),
            )
        })?;
        if c.is_real() {
            let m = am - Matrix::identity(d, d) * c.value.re;
            for chain in jordan_chains(&m, &sizes, tol.rank_tol, norm + c.value.norm())? {
                let cols: Vec<_> = chain.iter().map(|v| v.column(0)).collect();
                pieces.push((RealJordanBlock::new(c.value, chain.len()), Matrix::from_columns(&cols)));
            }
        } else {
            let zbar = c.value.conj();
            let m = to_complex(am) - DMatrix::<Complex64>::identity(d, d) * zbar;
            for chain in jordan_chains(&m, &sizes, tol.rank_tol, norm + c.value.norm())? {
                let k = chain.len();
                let mut p = Matrix::zeros(d, 2 * k);
                for (j, v) in chain.iter().enumerate() {
                    for i in 0..d {
                        p[(i, j)] = v[(i, 0)].re;
                        p[(i, k + j)] = v[(i, 0)].im;
                    }
                }
                pieces.push((RealJordanBlock::new(c.value, k), p));
            }
        }
    }
    pieces.sort_by(|(x, _), (y, _)| {
        x.z.re
            .total_cmp(&y.z.re)
            .then(x.z.im.total_cmp(&y.z.im))
            .then(y.m.cmp(&x.m))
    });
    let blocks: Vec<RealJordanBlock> = pieces.iter().map(|(b, _)| *b).collect();
    let mut basis = Matrix::zeros(d, d);
    let mut off = 0;
    for (b, p) in &pieces {
        basis.view_mut((0, off), (d, b.real_size)).copy_from(p);
        off += b.real_size;
    }
    if off != d {
        return Err(LinflowError::numerical(
            "real_jordan",
            "block sizes do not sum to the dimension",
        ));
    }
    let rc = inverse_condition(&basis);
    let condition = if rc > 0.0 { 1.0 / rc } else { f64::INFINITY };
    if condition > 1.0 / tol.rank_tol {
        return Err(LinflowError::IllConditioned { condition });
    }
    let inverse = basis
        .clone()
        .try_inverse()
        .ok_or(LinflowError::IllConditioned { condition })?;
    let mut dec = RealJordanDecomposition {
        blocks,
        basis,
        inverse,
        residual: 0.0,
        condition,
    };
    let j = dec.jordan_matrix();
    let err = spectral_norm(&(am * &dec.basis - &dec.basis * j));
    dec.residual = err / ((1.0 + a.norm()) * spectral_norm(&dec.basis));
    if dec.residual > tol.residual_tol.sqrt() {
        return Err(LinflowError::numerical(
            "real_jordan",
            format!(
                "Jordan basis residual {:.3e} too large; try loosening tolerances",
                dec.residual
            ),
        ));
    }
    Ok(dec)
}

/// Orthonormal basis of `gker(A − zI)`, via the real quadratic for complex `z`.
pub fn generalized_kernel(a: &GeneratorMatrix, z: Complex64, tol: &ToleranceProfile) -> Matrix {
    let z = if z.im < 0.0 { z.conj() } else { z };
    let m = shifted(a.matrix(), z);
    let d = a.dim();
    let base = (a.norm() + z.norm()).powi(if z.im == 0.0 { 1 } else { 2 });
    let mut power = m.clone();
    let mut k = kernel_basis_scaled(&power, tol.rank_tol, base);
    for n in 2..=d {
        power = &power * &m;
        let next = kernel_basis_scaled(&power, tol.rank_tol, base.powi(n as i32));
        if next.ncols() == k.ncols() {
            break;
        }
        k = next;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn canonical_rotation_is_kept() {
        let a = GeneratorMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let dec = real_jordan(&a, &tol()).unwrap();
        assert_eq!(dec.blocks, vec![RealJordanBlock::new(Complex64::new(0.0, 1.0), 1)]);
        let j = dec.jordan_matrix();
        assert!((a.matrix() * &dec.basis - &dec.basis * j).norm() < 1e-14);
    }

    #[test]
    fn diagonal_identity() {
        let dec = real_jordan(&GeneratorMatrix::identity(2), &tol()).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        assert!(dec.blocks.iter().all(|b| b.m == 1 && b.z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn defective_two_by_two() {
        // characteristic polynomial (λ − 2)², rank(A − 2I) = 1
        let a = GeneratorMatrix::from_rows(&[&[3.0, 1.0], &[-1.0, 1.0]]);
        let dec = real_jordan(&a, &tol()).unwrap();
        assert_eq!(dec.blocks, vec![RealJordanBlock::new(Complex64::new(2.0, 0.0), 2)]);
        assert!(dec.residual < 1e-14);
    }

    #[test]
    fn complex_chain_layout() {
        let j = GeneratorMatrix::block_diag(&[
            GeneratorMatrix::jordan_complex(2, 1.0, 3.0),
            GeneratorMatrix::diag(&[-1.0]),
        ]);
        let p = Matrix::from_fn(5, 5, |i, k| if i == k { 2.0 } else { 0.1 * (i as f64 - k as f64) });
        let a = j.conjugated(&p).unwrap();
        let dec = real_jordan(&a, &tol()).unwrap();
        assert_eq!(dec.blocks.len(), 2);
        assert!((dec.blocks[0].z - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(dec.blocks[1].m, 2);
        assert!((dec.blocks[1].z - Complex64::new(1.0, 3.0)).norm() < 1e-10);
        let r = a.matrix() * &dec.basis - &dec.basis * dec.jordan_matrix();
        assert!(r.norm() < 1e-10, "{}", r.norm());
    }

    #[test]
    fn generalized_kernel_examples() {
        let j2 = GeneratorMatrix::jordan_real(2, 0.0);
        assert_eq!(generalized_kernel(&j2, Complex64::new(0.0, 0.0), &tol()).ncols(), 2);

        let d = GeneratorMatrix::diag(&[1.0, 2.0]);
        let k = generalized_kernel(&d, Complex64::new(1.0, 0.0), &tol());
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)].abs() - 1.0).abs() < 1e-14);

        let r = GeneratorMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert_eq!(generalized_kernel(&r, Complex64::new(0.0, 1.0), &tol()).ncols(), 2);
    }
}
