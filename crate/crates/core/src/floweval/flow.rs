use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{LinflowError, Result};
use crate::flowstruct::{real_jordan, RealJordanBlock, RealJordanDecomposition};
use crate::matrix::{GeneratorMatrix, Matrix};
use crate::tolerance::ToleranceProfile;

/// Jordan bases worse than this are not trusted for closed-form evaluation.
const MAX_CLOSED_FORM_CONDITION: f64 = 1e5;

/// `e^{tA}` by scaling, a truncated Taylor series and repeated squaring.
pub fn exp_oracle(a: &GeneratorMatrix, t: f64) -> Result<Matrix> {
    expm(&(a.matrix() * t))
}

pub(crate) fn expm(m: &Matrix) -> Result<Matrix> {
    let d = m.nrows();
    let norm1 = (0..d)
        .map(|j| m.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if !norm1.is_finite() {
        return Err(LinflowError::Range("non-finite argument to the exponential".into()));
    }
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
        if squarings > 1100 {
            return Err(LinflowError::Range("argument too large for the exponential".into()));
        }
    }
    let x = m * scale;
    let mut term = Matrix::identity(d, d);
    let mut sum = term.clone();
    for k in 1..=30 {
        term = &term * &x / k as f64;
        sum += &term;
        if term.norm() <= f64::EPSILON * 1e-3 * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    if sum.iter().any(|v| !v.is_finite()) {
        return Err(LinflowError::Range(format!("e^M overflows for ‖M‖₁ = {norm1:.3e}")));
    }
    Ok(sum)
}

/// `e^{tJ}` for a single real Jordan block.
pub(crate) fn block_exp(block: &RealJordanBlock, t: f64) -> Matrix {
    let m = block.m;
    let mut poly = Matrix::zeros(m, m);
    let mut c = 1.0;
    for j in 0..m {
        if j > 0 {
            c *= t / j as f64;
        }
        for i in 0..m - j {
            poly[(i, i + j)] = c;
        }
    }
    let growth = (block.z.re * t).exp();
    if block.is_real() {
        return poly * growth;
    }
    let (s, co) = (block.z.im * t).sin_cos();
    let mut out = Matrix::zeros(2 * m, 2 * m);
    out.view_mut((0, 0), (m, m)).copy_from(&(&poly * (co * growth)));
    out.view_mut((m, m), (m, m)).copy_from(&(&poly * (co * growth)));
    out.view_mut((0, m), (m, m)).copy_from(&(&poly * (-s * growth)));
    out.view_mut((m, 0), (m, m)).copy_from(&(&poly * (s * growth)));
    out
}

/// A flow with its Jordan data computed once, so repeated evaluation is cheap.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    generator: GeneratorMatrix,
    jordan: Option<RealJordanDecomposition>,
}

impl LinearFlow {
    pub fn new(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Self {
        let jordan = real_jordan(a, tol)
            .ok()
            .filter(|j| j.condition <= MAX_CLOSED_FORM_CONDITION);
        LinearFlow {
            generator: a.clone(),
            jordan,
        }
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    /// Whether evaluation goes through the closed forms (otherwise the oracle).
    pub fn uses_closed_form(&self) -> bool {
        self.jordan.is_some()
    }

    /// `e^{tA}`.
    pub fn matrix(&self, t: f64) -> Result<Matrix> {
        let Some(j) = &self.jordan else {
            return exp_oracle(&self.generator, t);
        };
        let d = self.generator.dim();
        let mut e = Matrix::zeros(d, d);
        for (b, o) in j.blocks.iter().zip(j.offsets()) {
            e.view_mut((o, o), (b.real_size, b.real_size))
                .copy_from(&block_exp(b, t));
        }
        let out = &j.basis * e * &j.inverse;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(LinflowError::Range(format!("e^(tA) overflows at t = {t}")));
        }
        Ok(out)
    }

    /// `e^{tA} x`.
    pub fn apply(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.generator.dim() {
            return Err(LinflowError::DimensionMismatch {
                expected: self.generator.dim(),
                found: x.len(),
            });
        }
        Ok(self.matrix(t)? * x)
    }
}

/// `e^{tA} x` via the Jordan closed forms.
pub fn flow_map(a: &GeneratorMatrix, t: f64, x: &DVector<f64>, tol: &ToleranceProfile) -> Result<DVector<f64>> {
    LinearFlow::new(a, tol).apply(t, x)
}

/// Points of one orbit at the given times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSample {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    pub x0: Vec<f64>,
}

impl OrbitSample {
    /// Samples `e^{tA}x0`; `t = 0` is added when absent and times are sorted.
    pub fn compute(flow: &LinearFlow, x0: &DVector<f64>, times: &[f64]) -> Result<Self> {
        let mut ts: Vec<f64> = times.to_vec();
        if !ts.contains(&0.0) {
            ts.push(0.0);
        }
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut points = Vec::with_capacity(ts.len());
        for &t in &ts {
            let p = if t == 0.0 { x0.clone() } else { flow.apply(t, x0)? };
            points.push(p.iter().cloned().collect());
        }
        Ok(OrbitSample {
            times: ts,
            points,
            x0: x0.iter().cloned().collect(),
        })
    }

    /// Rows `t,x_1,…,x_d` with a header line.
    pub fn to_csv(&self) -> String {
        let d = self.x0.len();
        let mut out = String::from("t");
        for i in 1..=d {
            out.push_str(&format!(",x{i}"));
        }
        out.push('\n');
        for (t, p) in self.times.iter().zip(&self.points) {
            out.push_str(&format!("{t}"));
            for v in p {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn jordan_block_closed_form() {
        let j = GeneratorMatrix::jordan_real(2, 1.0);
        let t: f64 = 0.7;
        let x = v(&[0.3, -1.2]);
        let y = flow_map(&j, t, &x, &tol()).unwrap();
        let expect = v(&[t.exp() * (0.3 + t * -1.2), t.exp() * -1.2]);
        assert!((y - expect).norm() < 1e-14);
    }

    #[test]
    fn quarter_rotation_and_zero() {
        let r = GeneratorMatrix::jordan_complex(1, 0.0, 1.0);
        let y = flow_map(&r, FRAC_PI_2, &v(&[1.0, 0.0]), &tol()).unwrap();
        assert!((y - v(&[0.0, 1.0])).norm() < 1e-15);
        let x = v(&[1.0, 2.0, 3.0]);
        assert_eq!(flow_map(&GeneratorMatrix::zeros(3), 5.0, &x, &tol()).unwrap(), x);
    }

    #[test]
    fn oracle_examples() {
        let e = exp_oracle(&GeneratorMatrix::identity(2), 1.0).unwrap();
        assert!((e - Matrix::identity(2, 2) * E).norm() < 1e-14);
        let n = exp_oracle(&GeneratorMatrix::jordan_real(2, 0.0), 1.0).unwrap();
        assert!((n - Matrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn oracle_overflow_is_range_error() {
        let r = exp_oracle(&GeneratorMatrix::identity(2), 1e6);
        assert!(matches!(r, Err(LinflowError::Range(_))));
        let x = v(&[1.0, 1.0]);
        let r = flow_map(&GeneratorMatrix::identity(2), 1e6, &x, &tol());
        assert!(matches!(r, Err(LinflowError::Range(_))));
    }

    #[test]
    fn orbit_includes_origin_time() {
        let flow = LinearFlow::new(&GeneratorMatrix::diag(&[-1.0]), &tol());
        let o = OrbitSample::compute(&flow, &v(&[2.0]), &[1.0, -1.0]).unwrap();
        assert_eq!(o.times, vec![-1.0, 0.0, 1.0]);
        assert_eq!(o.points[1], vec![2.0]);
        assert!(o.to_csv().starts_with("t,x1\n-1,"));
    }
}
