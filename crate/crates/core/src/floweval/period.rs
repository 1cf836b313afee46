use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LinflowError, Result};
use crate::flowstruct::{real_jordan, Part};
use crate::matrix::{GeneratorMatrix, Matrix};
use crate::numcore::{eigenvalues, kernel_basis, kernel_basis_scaled, range_basis, shifted};
use crate::tolerance::ToleranceProfile;

/// Largest denominator accepted when reconstructing frequency ratios.
pub const MAX_DENOMINATOR: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum PeriodValue {
    Zero,
    Finite(f64),
    Infinite,
}

/// Minimal period of a point together with the data that determined it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodResult {
    pub value: PeriodValue,
    /// Participating frequencies `b_j > 0`, ascending.
    pub frequencies: Vec<f64>,
    /// `b_j / b_1 = p_j / q_j` for each participating frequency.
    pub commensurability_witness: Option<Vec<(u64, u64)>>,
}

/// Basis of the fixed-point set `ker A`.
pub fn fixed_space(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Matrix {
    kernel_basis(a.matrix(), tol.rank_tol)
}

/// Purely imaginary eigenvalues (including 0) with multiplicity.
pub fn imaginary_spectrum(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<Vec<Complex64>> {
    Ok(eigenvalues(a, tol)?.imaginary_axis())
}

/// Whether `x` is within `tol` of a positive integer.
fn near_positive_integer(x: f64, tol: &ToleranceProfile) -> bool {
    let n = x.round();
    n >= 1.0 && tol.ratio_eq(x, n)
}

/// Basis of `{x : e^{TA}x = x}`: `ker A` plus the rotation planes with `bT ∈ 2πN`.
pub fn periodic_subspace(a: &GeneratorMatrix, period: f64, tol: &ToleranceProfile) -> Result<Matrix> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(LinflowError::Domain(format!("period must be positive, got {period}")));
    }
    let d = a.dim();
    let mut cols: Vec<Matrix> = vec![fixed_space(a, tol)];
    let spec = eigenvalues(a, tol)?;
    for c in spec.clusters() {
        if c.value.re == 0.0 && c.value.im > 0.0 && near_positive_integer(c.value.im * period / TAU, tol) {
            let scale = (a.norm() + c.value.norm()).powi(2);
            cols.push(kernel_basis_scaled(&shifted(a.matrix(), c.value), tol.rank_tol, scale));
        }
    }
    let n: usize = cols.iter().map(|c| c.ncols()).sum();
    let mut stacked = Matrix::zeros(d, n);
    let mut off = 0;
    for c in &cols {
        stacked.view_mut((0, off), (d, c.ncols())).copy_from(c);
        off += c.ncols();
    }
    Ok(range_basis(&stacked, tol.rank_tol))
}

/// Rational `p/q` matching `x > 0` within the relative tolerance, by continued
/// fractions.
///
/// Every real has convergents with error below `1/q²`, so a match only counts
/// when it is much better than that generic bound (`q² · rel_tol ≤ 0.1`);
/// otherwise any irrational ratio would pass once `q` reaches `1/√rel_tol`.
pub fn rational_approximation(x: f64, rel_tol: f64, max_den: u64) -> Option<(u64, u64)> {
    if !(x > 0.0 && x.is_finite()) {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > u64::MAX as f64 / 4.0 {
            return None;
        }
        let a = a as u64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den || (k2 as f64).powi(2) * rel_tol > 0.1 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= rel_tol * x.max(1.0) {
            return Some((h1, k1));
        }
        let frac = r - a as f64;
        if frac == 0.0 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Minimal period of `x` under `e^{tA}`.
pub fn minimal_period(a: &GeneratorMatrix, x: &DVector<f64>, tol: &ToleranceProfile) -> Result<PeriodResult> {
    if x.len() != a.dim() {
        return Err(LinflowError::DimensionMismatch {
            expected: a.dim(),
            found: x.len(),
        });
    }
    let xn = x.norm();
    let none = |value| PeriodResult {
        value,
        frequencies: Vec::new(),
        commensurability_witness: None,
    };
    if xn == 0.0 {
        return Ok(none(PeriodValue::Zero));
    }
    let jordan = real_jordan(a, tol)?;
    let y = &jordan.inverse * x;
    let cutoff = tol.rank_tol * xn;
    let mut freqs: Vec<f64> = Vec::new();
    for (b, o) in jordan.blocks.iter().zip(jordan.offsets()) {
        // contribution of each Jordan coordinate to x
        let weight = |k: usize| jordan.basis.column(o + k).norm() * y[o + k].abs();
        let present: Vec<bool> = (0..b.real_size).map(|k| weight(k) > cutoff).collect();
        if !present.iter().any(|&p| p) {
            continue;
        }
        if Part::of(b) != Part::Central {
            return Ok(none(PeriodValue::Infinite));
        }
        // only the leading (eigen) coordinate of each chain may participate
        let generalized = if b.is_real() {
            present[1..].iter().any(|&p| p)
        } else {
            present[1..b.m].iter().any(|&p| p) || present[b.m + 1..].iter().any(|&p| p)
        };
        if generalized {
            return Ok(none(PeriodValue::Infinite));
        }
        if !b.is_real() {
            freqs.push(b.z.im);
        }
    }
    if freqs.is_empty() {
        return Ok(none(PeriodValue::Zero));
    }
    freqs.sort_by(f64::total_cmp);
    freqs.dedup_by(|p, q| tol.ratio_eq(*p, *q));
    let base = freqs[0];
    let mut witness = Vec::with_capacity(freqs.len());
    let mut lcm = 1u64;
    for &f in &freqs {
        match rational_approximation(f / base, tol.alpha_match_tol, MAX_DENOMINATOR) {
            Some((p, q)) => {
                witness.push((p, q));
                lcm = match (lcm / gcd(lcm, q)).checked_mul(q) {
                    Some(l) => l,
                    None => {
                        return Ok(PeriodResult {
                            value: PeriodValue::Infinite,
                            frequencies: freqs,
                            commensurability_witness: None,
                        })
                    }
                };
            }
            None => {
                return Ok(PeriodResult {
                    value: PeriodValue::Infinite,
                    frequencies: freqs,
                    commensurability_witness: None,
                })
            }
        }
    }
    Ok(PeriodResult {
        value: PeriodValue::Finite(TAU * lcm as f64 / base),
        frequencies: freqs,
        commensurability_witness: Some(witness),
    })
}
