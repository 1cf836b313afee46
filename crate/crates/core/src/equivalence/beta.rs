//! Lyapunov cross ratio and the β-level deciders built on it.

use serde::{Deserialize, Serialize};

use super::deciders::check_same_dim;
use super::verdict::{EquivalenceLevel, EquivalenceVerdict, ReasonCode};
use crate::error::{LinflowError, Result};
use crate::flowstruct::{scu_split, FlowDecomposition};
use crate::matrix::GeneratorMatrix;
use crate::tolerance::ToleranceProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossRatio {
    /// `ρ₊(Φ, Ψ)` for the flows as given.
    pub rho_plus: f64,
    /// `max{ρ₊(Φ, Ψ), ρ₊(Φ*, Ψ)}`.
    pub rho: f64,
    /// Whether `ρ > 0`, i.e. the `{d_S, d_U}` sets agree.
    pub positive: bool,
    /// Whether the maximum was attained by the time-reversed first flow.
    pub reversed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaSide {
    Minus,
    Plus,
}

fn rho_plus(x: &[f64], y: &[f64]) -> f64 {
    let ratios = x.iter().zip(y).map(|(p, q)| p / q);
    let (lo, hi) = ratios.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    lo / hi.abs()
}

/// Cross ratio of two hyperbolic Lyapunov spectra (each ascending, no zeros).
pub fn cross_ratio_from_spectra(la: &[f64], lb: &[f64]) -> Result<CrossRatio> {
    if la.len() != lb.len() {
        return Err(LinflowError::DimensionMismatch {
            expected: la.len(),
            found: lb.len(),
        });
    }
    if la.is_empty() {
        return Err(LinflowError::Domain("cross ratio of empty spectra".into()));
    }
    if la.iter().chain(lb).any(|&l| l == 0.0) {
        return Err(LinflowError::Domain("cross ratio requires hyperbolic flows".into()));
    }
    let direct = rho_plus(la, lb);
    let rev: Vec<f64> = la.iter().rev().map(|l| -l).collect();
    let flipped = rho_plus(&rev, lb);
    let rho = direct.max(flipped);
    Ok(CrossRatio {
        rho_plus: direct,
        rho,
        positive: rho > 0.0,
        reversed: flipped > direct,
    })
}

/// Lyapunov cross ratio `ρ(Φ, Ψ)`.
pub fn cross_ratio(fa: &FlowDecomposition, fb: &FlowDecomposition) -> Result<CrossRatio> {
    if !fa.is_hyperbolic() || !fb.is_hyperbolic() {
        return Err(LinflowError::Domain("cross ratio requires hyperbolic flows".into()));
    }
    cross_ratio_from_spectra(&fa.lambda, &fb.lambda)
}

/// Time change realizing the cross ratio: `√(min r · max r)` over the
/// coordinate ratios of the better orientation, negative when reversed.
fn optimal_alpha(la: &[f64], lb: &[f64], reversed: bool) -> f64 {
    let x: Vec<f64> = if reversed {
        la.iter().rev().map(|l| -l).collect()
    } else {
        la.to_vec()
    };
    let ratios: Vec<f64> = x.iter().zip(lb).map(|(p, q)| p / q).collect();
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let a = (lo * hi).sqrt();
    if reversed {
        -a
    } else {
        a
    }
}

fn one_sided(f: &FlowDecomposition) -> bool {
    f.d_s == f.dim() || f.d_u == f.dim()
}

/// β⁻ / β⁺ equivalence for hyperbolic flows.
///
/// Exact when each flow is entirely stable or entirely unstable; for other
/// hyperbolic pairs only the sufficient condition can be confirmed, and a
/// failed check is reported with `conclusive = false` and reason `unknown`.
pub fn decide_beta(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    beta: f64,
    side: BetaSide,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    check_same_dim(a, b)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(LinflowError::Domain(format!("β must lie in (0,1), got {beta}")));
    }
    let (fa, fb) = (scu_split(a, tol)?, scu_split(b, tol)?);
    if !fa.is_hyperbolic() || !fb.is_hyperbolic() {
        return Err(LinflowError::Domain(
            "β-equivalence is decided only for flows without central part".into(),
        ));
    }
    let level = match side {
        BetaSide::Minus => EquivalenceLevel::BetaMinus(beta),
        BetaSide::Plus => EquivalenceLevel::BetaPlus(beta),
    };
    let cr = cross_ratio(&fa, &fb)?;
    if !cr.positive {
        return Ok(EquivalenceVerdict::no(level, vec![ReasonCode::DimsMismatch]));
    }
    let b2 = beta * beta;
    let boundary = (b2 - cr.rho).abs() <= tol.alpha_match_tol * cr.rho;
    let holds = match (side, boundary) {
        (BetaSide::Minus, true) => true,
        (BetaSide::Plus, true) => false,
        (BetaSide::Minus, false) => b2 <= cr.rho,
        (BetaSide::Plus, false) => b2 < cr.rho,
    };
    let mut reason = vec![ReasonCode::CrossRatioBound];
    if boundary {
        reason.push(ReasonCode::Boundary);
    }
    let exact = one_sided(&fa) && one_sided(&fb);
    let alpha = optimal_alpha(&fa.lambda, &fb.lambda, cr.reversed);
    if holds {
        if !exact {
            reason.push(ReasonCode::SufficientConditionHolds);
        }
        return Ok(EquivalenceVerdict::yes(level, alpha, reason));
    }
    let mut v = EquivalenceVerdict::no(level, reason);
    if !exact {
        v.reason.push(ReasonCode::Unknown);
        v.conclusive = false;
        v.implied.clear();
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn quarter_ratio_pair() -> (GeneratorMatrix, GeneratorMatrix) {
        let a = GeneratorMatrix::block_diag(&[
            GeneratorMatrix::diag(&[1.0, 1.0]),
            GeneratorMatrix::jordan_real(2, 2.0),
            GeneratorMatrix::diag(&[4.0]),
        ]);
        (a, GeneratorMatrix::identity(5))
    }

    #[test]
    fn cross_ratio_examples() {
        let c = cross_ratio_from_spectra(&[1.0, 1.0, 2.0, 2.0, 4.0], &[1.0; 5]).unwrap();
        assert_eq!(c.rho, 0.25);
        let c = cross_ratio_from_spectra(&[-1.0, 1.0], &[-2.0, 3.0]).unwrap();
        assert!((c.rho - 2.0 / 3.0).abs() < 1e-15);
        let c = cross_ratio_from_spectra(&[-3.0, -1.0], &[-3.0, -1.0]).unwrap();
        assert_eq!(c.rho, 1.0);
        let c = cross_ratio_from_spectra(&[-1.0, -1.0], &[-1.0, 1.0]).unwrap();
        assert!(!c.positive);
        assert!(cross_ratio_from_spectra(&[0.0, 1.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn beta_threshold() {
        let (a, b) = quarter_ratio_pair();
        let v = decide_beta(&a, &b, 0.5, BetaSide::Minus, &tol()).unwrap();
        assert!(v.equivalent);
        assert!(v.reason.contains(&ReasonCode::Boundary));
        let v = decide_beta(&a, &b, 0.5, BetaSide::Plus, &tol()).unwrap();
        assert!(!v.equivalent && v.conclusive);
        let v = decide_beta(&a, &b, 0.6, BetaSide::Minus, &tol()).unwrap();
        assert!(!v.equivalent && v.conclusive);
        let v = decide_beta(&a, &a, 0.9, BetaSide::Minus, &tol()).unwrap();
        assert!(v.equivalent);
    }

    #[test]
    fn hyperbolic_saddles_are_one_sided() {
        let a = GeneratorMatrix::diag(&[-1.0, 1.0]);
        let b = GeneratorMatrix::diag(&[-1.0, 4.0]);
        // ρ = 1/4
        let v = decide_beta(&a, &b, 0.4, BetaSide::Minus, &tol()).unwrap();
        assert!(v.equivalent);
        assert!(v.reason.contains(&ReasonCode::SufficientConditionHolds));
        let v = decide_beta(&a, &b, 0.6, BetaSide::Minus, &tol()).unwrap();
        assert!(!v.equivalent && !v.conclusive);
        assert!(v.reason.contains(&ReasonCode::Unknown));
    }

    #[test]
    fn central_part_is_a_domain_error() {
        let a = GeneratorMatrix::diag(&[0.0, 1.0]);
        let r = decide_beta(&a, &a, 0.5, BetaSide::Minus, &tol());
        assert!(matches!(r, Err(LinflowError::Domain(_))));
    }
}
