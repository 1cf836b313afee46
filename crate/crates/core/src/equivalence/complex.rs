//! Equivalence of complex linear flows, decided on their realifications.

use super::beta::{decide_beta, BetaSide};
use super::canon::decide_lipschitz;
use super::deciders::{decide_holder, decide_smooth, decide_topological};
use super::verdict::{EquivalenceLevel, EquivalenceVerdict};
use crate::error::{LinflowError, Result};
use crate::flowstruct::realify;
use crate::matrix::{CMatrix, GeneratorMatrix};
use crate::tolerance::ToleranceProfile;

/// Run the decider for `level`. Some-Hölder is answered by the topological
/// decider, since the two coincide for linear flows.
pub fn decide(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    level: EquivalenceLevel,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    match level {
        EquivalenceLevel::Topological => decide_topological(a, b, tol),
        EquivalenceLevel::SomeHolder => {
            let mut v = decide_topological(a, b, tol)?;
            v.level = level;
            v.implied = level.implied(v.equivalent);
            Ok(v)
        }
        EquivalenceLevel::BetaMinus(beta) => decide_beta(a, b, beta, BetaSide::Minus, tol),
        EquivalenceLevel::BetaPlus(beta) => decide_beta(a, b, beta, BetaSide::Plus, tol),
        EquivalenceLevel::AllHolder => decide_holder(a, b, tol),
        EquivalenceLevel::Lipschitz => decide_lipschitz(a, b, tol),
        EquivalenceLevel::Smooth => decide_smooth(a, b, tol),
    }
}

/// Classify the complex flows `e^{tM}`, `e^{tN}` at `level`.
///
/// The smooth level demands a complex-linear conjugacy, which the smooth
/// decider enforces for realified inputs.
pub fn classify_complex(
    m: &CMatrix,
    n: &CMatrix,
    level: EquivalenceLevel,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    if !m.is_square() || !n.is_square() {
        let (rows, cols) = if m.is_square() { n.shape() } else { m.shape() };
        return Err(LinflowError::NotSquare { rows, cols });
    }
    if m.nrows() != n.nrows() {
        return Err(LinflowError::DimensionMismatch {
            expected: m.nrows(),
            found: n.nrows(),
        });
    }
    let (a, b) = (realify(m)?, realify(n)?);
    decide(&a, &b, level, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equivalence::ReasonCode;
    use num_complex::Complex64;

    fn one(re: f64, im: f64) -> CMatrix {
        CMatrix::from_element(1, 1, Complex64::new(re, im))
    }

    #[test]
    fn conjugate_pair() {
        let tol = ToleranceProfile::default();
        let (m, n) = (one(1.0, 1.0), one(1.0, -1.0));
        assert!(
            classify_complex(&m, &n, EquivalenceLevel::AllHolder, &tol)
                .unwrap()
                .equivalent
        );
        assert!(
            classify_complex(&m, &n, EquivalenceLevel::Lipschitz, &tol)
                .unwrap()
                .equivalent
        );
        let v = classify_complex(&m, &n, EquivalenceLevel::Smooth, &tol).unwrap();
        assert!(!v.equivalent);
        assert!(v.reason.contains(&ReasonCode::ComplexLinearNotSimilar));
        // the real flows themselves are smoothly equivalent
        let (a, b) = (realify(&m).unwrap(), realify(&n).unwrap());
        let (a, b) = (
            GeneratorMatrix::new(a.into_matrix()).unwrap(),
            GeneratorMatrix::new(b.into_matrix()).unwrap(),
        );
        assert!(decide_smooth(&a, &b, &tol).unwrap().equivalent);
    }

    #[test]
    fn rotations() {
        let tol = ToleranceProfile::default();
        let v = classify_complex(&one(0.0, 1.0), &one(0.0, 2.0), EquivalenceLevel::Topological, &tol).unwrap();
        assert!(v.equivalent);
        assert!((v.alpha.unwrap().abs() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn size_mismatch() {
        let tol = ToleranceProfile::default();
        let r = classify_complex(&one(1.0, 0.0), &CMatrix::zeros(2, 2), EquivalenceLevel::Smooth, &tol);
        assert!(matches!(r, Err(LinflowError::DimensionMismatch { .. })));
    }
}
