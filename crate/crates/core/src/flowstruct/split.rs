use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::jordan::{real_jordan, RealJordanBlock, RealJordanDecomposition};
use crate::error::Result;
use crate::matrix::{CMatrix, GeneratorMatrix, Matrix, Origin};
use crate::numcore::eigenvalues;
use crate::tolerance::ToleranceProfile;

/// Which of the three invariant subspaces a block belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Stable,
    Central,
    Unstable,
}

impl Part {
    pub fn of(block: &RealJordanBlock) -> Part {
        if block.z.re < 0.0 {
            Part::Stable
        } else if block.z.re > 0.0 {
            Part::Unstable
        } else {
            Part::Central
        }
    }
}

/// Stable/central/unstable splitting together with the Jordan data it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowDecomposition {
    pub d_s: usize,
    pub d_c: usize,
    pub d_u: usize,
    /// Orthonormal columns spanning each subspace.
    pub basis_s: Matrix,
    pub basis_c: Matrix,
    pub basis_u: Matrix,
    /// Generator restricted to each subspace, in the orthonormal basis above.
    pub a_s: Matrix,
    pub a_c: Matrix,
    pub a_u: Matrix,
    /// Lyapunov exponents, ascending, with multiplicity.
    pub lambda: Vec<f64>,
    pub jordan: RealJordanDecomposition,
}

impl FlowDecomposition {
    pub fn dim(&self) -> usize {
        self.d_s + self.d_c + self.d_u
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.d_c == 0
    }

    /// Exponents of the hyperbolic part (all nonzero entries of `lambda`).
    pub fn hyperbolic_lambda(&self) -> Vec<f64> {
        self.lambda.iter().cloned().filter(|&l| l != 0.0).collect()
    }

    /// Restricted central generator, or `None` when the central part is trivial.
    pub fn central_generator(&self) -> Option<GeneratorMatrix> {
        if self.d_c == 0 {
            None
        } else {
            Some(GeneratorMatrix::new(self.a_c.clone()).expect("restriction of a finite matrix"))
        }
    }

    /// Imaginary parts `b > 0` of central eigenvalues, with multiplicity.
    pub fn central_frequencies(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for b in &self.jordan.blocks {
            if Part::of(b) == Part::Central && !b.is_real() {
                out.extend(std::iter::repeat(b.z.im).take(b.m));
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

fn orthonormal_columns(m: &Matrix) -> Matrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    m.clone().qr().q()
}

/// Split `A` into stable, central and unstable parts.
pub fn scu_split(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<FlowDecomposition> {
    let jordan = real_jordan(a, tol)?;
    let pick = |p: Part| orthonormal_columns(&jordan.columns_where(|b| Part::of(b) == p));
    let (basis_s, basis_c, basis_u) = (pick(Part::Stable), pick(Part::Central), pick(Part::Unstable));
    let restrict = |b: &Matrix| b.transpose() * a.matrix() * b;
    let mut lambda: Vec<f64> = jordan
        .blocks
        .iter()
        .flat_map(|b| std::iter::repeat(b.z.re).take(b.real_size))
        .collect();
    lambda.sort_by(f64::total_cmp);
    Ok(FlowDecomposition {
        d_s: basis_s.ncols(),
        d_c: basis_c.ncols(),
        d_u: basis_u.ncols(),
        a_s: restrict(&basis_s),
        a_c: restrict(&basis_c),
        a_u: restrict(&basis_u),
        basis_s,
        basis_c,
        basis_u,
        lambda,
        jordan,
    })
}

/// Real parts of the eigenvalues, ascending, repeated by real multiplicity.
pub fn lyapunov_spectrum(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<Vec<f64>> {
    let spec = eigenvalues(a, tol)?;
    let mut out: Vec<f64> = spec.eigenvalues.iter().map(|z| z.re).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Orthonormal basis of the sum of generalized eigenspaces with `Re z ≤ s`.
pub fn lyapunov_space(a: &GeneratorMatrix, s: f64, tol: &ToleranceProfile) -> Result<Matrix> {
    let jordan = real_jordan(a, tol)?;
    let slack = tol.eig_radius(a.norm());
    Ok(orthonormal_columns(&jordan.columns_where(|b| b.z.re <= s + slack)))
}

/// Real `2n × 2n` representation of a complex `n × n` matrix; the scalar
/// `a+ib` in position `(j,k)` becomes `[[a,−b],[b,a]]` at rows `2j..2j+2`,
/// columns `2k..2k+2`.
pub fn realify(m: &CMatrix) -> Result<GeneratorMatrix> {
    GeneratorMatrix::with_origin(realify_matrix(m), Origin::RealifiedComplex)
}

pub(crate) fn realify_matrix(m: &CMatrix) -> Matrix {
    let (r, c) = m.shape();
    let mut out = Matrix::zeros(2 * r, 2 * c);
    for j in 0..r {
        for k in 0..c {
            let z = m[(j, k)];
            out[(2 * j, 2 * k)] = z.re;
            out[(2 * j, 2 * k + 1)] = -z.im;
            out[(2 * j + 1, 2 * k)] = z.im;
            out[(2 * j + 1, 2 * k + 1)] = z.re;
        }
    }
    out
}

/// Multiplication by `i` on the realification of `C^n`.
pub fn complex_structure(n: usize) -> Matrix {
    realify_matrix(&(CMatrix::identity(n, n) * Complex64::new(0.0, 1.0)))
}

/// Generator of the time-reversed flow.
pub fn time_reverse(a: &GeneratorMatrix) -> GeneratorMatrix {
    a.scaled(-1.0)
}
