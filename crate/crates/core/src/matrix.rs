//! The generator type and a few constructors for the standard blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LinflowError, Result};

pub type Matrix = DMatrix<f64>;
pub type CMatrix = DMatrix<Complex64>;

/// Where a generator came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    RealInput,
    RealifiedComplex,
}

/// Square real matrix generating the flow `t ↦ e^{tA}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    entries: Matrix,
    origin: Origin,
}

impl GeneratorMatrix {
    pub fn new(entries: Matrix) -> Result<Self> {
        Self::with_origin(entries, Origin::RealInput)
    }

    pub fn with_origin(entries: Matrix, origin: Origin) -> Result<Self> {
        let (r, c) = entries.shape();
        if r != c {
            return Err(LinflowError::NotSquare { rows: r, cols: c });
        }
        if r == 0 {
            return Err(LinflowError::Empty);
        }
        for j in 0..c {
            for i in 0..r {
                if !entries[(i, j)].is_finite() {
                    return Err(LinflowError::NonFinite {
                        name: "generator".into(),
                        row: i,
                        col: j,
                    });
                }
            }
        }
        if origin == Origin::RealifiedComplex && r % 2 != 0 {
            return Err(LinflowError::Domain(
                "realified generator must have even dimension".into(),
            ));
        }
        Ok(GeneratorMatrix { entries, origin })
    }

    /// Row-major construction; panics on ragged or non-finite input, meant for literals.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let d = rows.len();
        let m = Matrix::from_fn(d, d, |i, j| rows[i][j]);
        Self::new(m).expect("invalid matrix literal")
    }

    pub fn zeros(d: usize) -> Self {
        Self::new(Matrix::zeros(d, d)).expect("dimension must be positive")
    }

    pub fn identity(d: usize) -> Self {
        Self::new(Matrix::identity(d, d)).expect("dimension must be positive")
    }

    pub fn diag(values: &[f64]) -> Self {
        let d = values.len();
        Self::new(Matrix::from_fn(d, d, |i, j| if i == j { values[i] } else { 0.0 })).expect("invalid diagonal")
    }

    /// Real Jordan block `J_m(a) = a I_m + J_m` (ones on the superdiagonal).
    pub fn jordan_real(m: usize, a: f64) -> Self {
        Self::new(jordan_real_block(m, a)).expect("invalid block")
    }

    /// Real Jordan block `J_m(a+ib)` of size `2m` in the layout
    /// `a I_{2m} + [[J_m, -b I_m], [b I_m, J_m]]`.
    pub fn jordan_complex(m: usize, a: f64, b: f64) -> Self {
        Self::new(jordan_complex_block(m, a, b)).expect("invalid block")
    }

    /// Block diagonal assembly.
    pub fn block_diag(blocks: &[GeneratorMatrix]) -> Self {
        let mats: Vec<Matrix> = blocks.iter().map(|b| b.entries.clone()).collect();
        Self::new(block_diag(&mats)).expect("empty block list")
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn matrix(&self) -> &Matrix {
        &self.entries
    }

    pub fn into_matrix(self) -> Matrix {
        self.entries
    }

    /// Spectral norm.
    pub fn norm(&self) -> f64 {
        spectral_norm(&self.entries)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        GeneratorMatrix {
            entries: &self.entries * alpha,
            origin: self.origin,
        }
    }

    /// `Q A Q⁻¹`.
    pub fn conjugated(&self, q: &Matrix) -> Result<Self> {
        let qi = q
            .clone()
            .try_inverse()
            .ok_or_else(|| LinflowError::numerical("conjugation", "singular transform"))?;
        Self::with_origin(q * &self.entries * qi, self.origin)
    }
}

pub(crate) fn jordan_real_block(m: usize, a: f64) -> Matrix {
    Matrix::from_fn(m, m, |i, j| {
        if i == j {
            a
        } else if j == i + 1 {
            1.0
        } else {
            0.0
        }
    })
}

pub(crate) fn jordan_complex_block(m: usize, a: f64, b: f64) -> Matrix {
    let mut out = Matrix::zeros(2 * m, 2 * m);
    for k in 0..m {
        out[(k, k)] = a;
        out[(m + k, m + k)] = a;
        out[(k, m + k)] = -b;
        out[(m + k, k)] = b;
        if k + 1 < m {
            out[(k, k + 1)] = 1.0;
            out[(m + k, m + k + 1)] = 1.0;
        }
    }
    out
}

pub(crate) fn block_diag(blocks: &[Matrix]) -> Matrix {
    let d: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = Matrix::zeros(d, d);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

pub(crate) fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    crate::numcore::singular_values(m).first().cloned().unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_square_and_non_finite() {
        assert!(matches!(
            GeneratorMatrix::new(Matrix::zeros(2, 3)),
            Err(LinflowError::NotSquare { .. })
        ));
        let mut m = Matrix::zeros(2, 2);
        m[(1, 0)] = f64::NAN;
        assert!(matches!(
            GeneratorMatrix::new(m),
            Err(LinflowError::NonFinite { row: 1, col: 0, .. })
        ));
        assert!(matches!(
            GeneratorMatrix::new(Matrix::zeros(0, 0)),
            Err(LinflowError::Empty)
        ));
    }

    #[test]
    fn complex_block_layout() {
        let j = GeneratorMatrix::jordan_complex(2, 1.0, 3.0);
        let expect = GeneratorMatrix::from_rows(&[
            &[1.0, 1.0, -3.0, 0.0],
            &[0.0, 1.0, 0.0, -3.0],
            &[3.0, 0.0, 1.0, 1.0],
            &[0.0, 3.0, 0.0, 1.0],
        ]);
        assert_eq!(j, expect);
        let r = GeneratorMatrix::jordan_complex(1, 0.0, 1.0);
        assert_eq!(r, GeneratorMatrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]));
    }
}
