//! Topological, all-Hölder and smooth deciders.

use super::verdict::{EquivalenceLevel, EquivalenceVerdict, ReasonCode};
use crate::error::{LinflowError, Result};
use crate::flowstruct::{complex_structure, scu_split, time_reverse, FlowDecomposition};
use crate::matrix::{GeneratorMatrix, Origin};
use crate::numcore::{current_seed, find_similarity, find_similarity_constrained};
use crate::tolerance::ToleranceProfile;

fn push_unique(out: &mut Vec<f64>, x: f64, tol: &ToleranceProfile) {
    if x.is_finite() && x != 0.0 && !out.iter().any(|&y| tol.ratio_eq(x, y)) {
        out.push(x);
    }
}

/// Finite set of time-rescaling factors worth testing.
///
/// Any valid α matches a ratio of sorted Lyapunov exponents (in either
/// orientation) or of central frequencies. `±1` is always added unless the
/// central part has nonzero spectrum (then the frequency ratios pin α down),
/// and the result is `{1}` when there are no ratios at all.
pub fn alpha_candidates(fa: &FlowDecomposition, fb: &FlowDecomposition, tol: &ToleranceProfile) -> Vec<f64> {
    let (la, lb) = (&fa.lambda, &fb.lambda);
    let fa_c = fa.central_frequencies();
    let fb_c = fb.central_frequencies();
    let central_rotation = !fa_c.is_empty() || !fb_c.is_empty();
    let mut ratios = Vec::new();
    if la.len() == lb.len() {
        let d = la.len();
        for j in 0..d {
            if la[j] != 0.0 && lb[j] != 0.0 {
                push_unique(&mut ratios, la[j] / lb[j], tol);
            }
        }
        for j in 0..d {
            if la[j] != 0.0 && lb[d - 1 - j] != 0.0 {
                push_unique(&mut ratios, la[j] / lb[d - 1 - j], tol);
            }
        }
    }
    for &x in &fa_c {
        for &y in &fb_c {
            push_unique(&mut ratios, x / y, tol);
            push_unique(&mut ratios, -x / y, tol);
        }
    }
    if ratios.is_empty() && !central_rotation {
        return vec![1.0];
    }
    let mut out = Vec::new();
    if !central_rotation {
        out.push(1.0);
        out.push(-1.0);
    }
    for r in ratios {
        push_unique(&mut out, r, tol);
    }
    // prefer α close to 1 in magnitude, positive first
    out.sort_by(|x, y| {
        x.abs()
            .ln()
            .abs()
            .total_cmp(&y.abs().ln().abs())
            .then((*x < 0.0).cmp(&(*y < 0.0)))
            .then(x.total_cmp(y))
    });
    out
}

pub(crate) fn check_same_dim(a: &GeneratorMatrix, b: &GeneratorMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(LinflowError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// Whether the central parts satisfy `A_C ~ m·B_C` for `m > 0`.
fn central_similar(fa: &FlowDecomposition, fb: &FlowDecomposition, m: f64, tol: &ToleranceProfile) -> Result<bool> {
    match (fa.central_generator(), fb.central_generator()) {
        (None, None) => Ok(true),
        (Some(ac), Some(bc)) => Ok(find_similarity(&ac, &bc.scaled(m), tol)?.is_some()),
        _ => Ok(false),
    }
}

fn central_rotation_match(fa: &FlowDecomposition, fb: &FlowDecomposition, m: f64, tol: &ToleranceProfile) -> bool {
    let (x, y) = (fa.central_frequencies(), fb.central_frequencies());
    x.len() == y.len() && x.iter().zip(&y).all(|(p, q)| tol.ratio_eq(*p, m * q))
}

/// Topological equivalence: matching `{d_S, d_U}` and similar central parts
/// up to a positive time change.
pub fn decide_topological(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    check_same_dim(a, b)?;
    let (fa, fb) = (scu_split(a, tol)?, scu_split(b, tol)?);
    decide_topological_split(&fa, &fb, tol)
}

pub(crate) fn decide_topological_split(
    fa: &FlowDecomposition,
    fb: &FlowDecomposition,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    let level = EquivalenceLevel::Topological;
    if fa.d_c != fb.d_c {
        return Ok(EquivalenceVerdict::no(
            level,
            vec![ReasonCode::DimsMismatch, ReasonCode::CentralDimMismatch],
        ));
    }
    let direct = fa.d_s == fb.d_s && fa.d_u == fb.d_u;
    let reversed = fa.d_s == fb.d_u && fa.d_u == fb.d_s;
    if !direct && !reversed {
        return Ok(EquivalenceVerdict::no(level, vec![ReasonCode::DimsMismatch]));
    }
    let sign = if direct { 1.0 } else { -1.0 };
    if fa.d_c == 0 {
        return Ok(EquivalenceVerdict::yes(
            level,
            sign,
            vec![ReasonCode::HyperbolicDimsMatch],
        ));
    }
    // A_C and −A_C are always similar, so only |α| matters for the central part
    let mut tried: Vec<f64> = Vec::new();
    for alpha in alpha_candidates(fa, fb, tol) {
        let m = alpha.abs();
        if tried.iter().any(|&t| tol.ratio_eq(t, m)) {
            continue;
        }
        tried.push(m);
        if !central_rotation_match(fa, fb, m, tol) {
            continue;
        }
        if central_similar(fa, fb, m, tol)? {
            return Ok(EquivalenceVerdict::yes(
                level,
                sign * m,
                vec![ReasonCode::HyperbolicDimsMatch, ReasonCode::CentralSimilar],
            ));
        }
    }
    Ok(EquivalenceVerdict::no(level, vec![ReasonCode::CentralNotSimilar]))
}

fn lambda_match(x: &[f64], y: &[f64], alpha: f64, tol: &ToleranceProfile) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let d = y.len();
    if alpha > 0.0 {
        x.iter().zip(y).all(|(p, q)| tol.ratio_eq(*p, alpha * q))
    } else {
        // α < 0 pairs λ_j with −|α| λ_{d+1−j}
        (0..d).all(|j| tol.ratio_eq(x[j], alpha * y[d - 1 - j]))
    }
}

/// All-Hölder equivalence: Lyapunov similarity of `A` and `αB` on the
/// hyperbolic part (allowing time reversal) plus similar central parts.
pub fn decide_holder(a: &GeneratorMatrix, b: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<EquivalenceVerdict> {
    check_same_dim(a, b)?;
    let (fa, fb) = (scu_split(a, tol)?, scu_split(b, tol)?);
    decide_holder_split(&fa, &fb, tol)
}

pub(crate) fn decide_holder_split(
    fa: &FlowDecomposition,
    fb: &FlowDecomposition,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    let level = EquivalenceLevel::AllHolder;
    if fa.d_c != fb.d_c {
        return Ok(EquivalenceVerdict::no(level, vec![ReasonCode::CentralDimMismatch]));
    }
    let (ha, hb) = (fa.hyperbolic_lambda(), fb.hyperbolic_lambda());
    let mut lyapunov_ok = false;
    for alpha in alpha_candidates(fa, fb, tol) {
        if !lambda_match(&ha, &hb, alpha, tol) {
            continue;
        }
        lyapunov_ok = true;
        let m = alpha.abs();
        if central_rotation_match(fa, fb, m, tol) && central_similar(fa, fb, m, tol)? {
            return Ok(EquivalenceVerdict::yes(
                level,
                alpha,
                vec![ReasonCode::LyapunovSimilar, ReasonCode::CentralSimilar],
            ));
        }
    }
    let reason = if lyapunov_ok {
        ReasonCode::CentralNotSimilar
    } else {
        ReasonCode::LyapunovMismatch
    };
    Ok(EquivalenceVerdict::no(level, vec![reason]))
}

/// Smooth (equivalently linear) equivalence: `A` similar to `αB`; for two
/// realified complex generators the similarity must also commute with `i`.
pub fn decide_smooth(a: &GeneratorMatrix, b: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<EquivalenceVerdict> {
    check_same_dim(a, b)?;
    let (fa, fb) = (scu_split(a, tol)?, scu_split(b, tol)?);
    decide_smooth_split(a, b, &fa, &fb, tol)
}

pub(crate) fn decide_smooth_split(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    fa: &FlowDecomposition,
    fb: &FlowDecomposition,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    let level = EquivalenceLevel::Smooth;
    let complex = a.origin() == Origin::RealifiedComplex && b.origin() == Origin::RealifiedComplex;
    let j = complex_structure(a.dim() / 2);
    let mut spectral_ok = false;
    for alpha in alpha_candidates(fa, fb, tol) {
        if !lambda_match(&fa.lambda, &fb.lambda, alpha, tol) {
            continue;
        }
        if !central_rotation_match(fa, fb, alpha.abs(), tol) {
            continue;
        }
        spectral_ok = true;
        // negative α is handled as −A against |α|B
        let lhs = if alpha < 0.0 { time_reverse(a) } else { a.clone() };
        let rhs = b.scaled(alpha.abs());
        let q = if complex {
            find_similarity_constrained(&lhs, &rhs, &[&j], tol, current_seed())?
        } else {
            find_similarity(&lhs, &rhs, tol)?
        };
        if q.is_some() {
            return Ok(EquivalenceVerdict::yes(level, alpha, vec![ReasonCode::Similar]));
        }
    }
    let reason = match (spectral_ok, complex) {
        (false, _) => ReasonCode::LyapunovMismatch,
        (true, true) => ReasonCode::ComplexLinearNotSimilar,
        (true, false) => ReasonCode::NotSimilar,
    };
    Ok(EquivalenceVerdict::no(level, vec![reason]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn split(a: &GeneratorMatrix) -> FlowDecomposition {
        scu_split(a, &tol()).unwrap()
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    fn close(x: &[f64], y: &[f64]) -> bool {
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| (p - q).abs() < 1e-12)
    }

    #[test]
    fn candidates_examples() {
        let fa = split(&GeneratorMatrix::diag(&[-1.0, 1.0]));
        let fb = split(&GeneratorMatrix::diag(&[-2.0, 3.0]));
        let c = sorted(alpha_candidates(&fa, &fb, &tol()));
        assert!(close(&c, &[-1.0, -0.5, -1.0 / 3.0, 1.0 / 3.0, 0.5, 1.0]), "{c:?}");

        let fa = split(&GeneratorMatrix::jordan_real(2, 0.0));
        let fb = split(&GeneratorMatrix::zeros(2));
        assert_eq!(alpha_candidates(&fa, &fb, &tol()), vec![1.0]);

        let fa = split(&GeneratorMatrix::jordan_complex(1, 0.0, 2.0));
        let fb = split(&GeneratorMatrix::jordan_complex(1, 0.0, 1.0));
        assert_eq!(sorted(alpha_candidates(&fa, &fb, &tol())), vec![-2.0, 2.0]);
    }

    #[test]
    fn topological_examples() {
        let v = decide_topological(
            &GeneratorMatrix::diag(&[-1.0, 1.0]),
            &GeneratorMatrix::diag(&[-2.0, 3.0]),
            &tol(),
        )
        .unwrap();
        assert!(v.equivalent);
        assert_eq!(v.alpha, Some(1.0));

        let v = decide_topological(
            &GeneratorMatrix::diag(&[0.0, 1.0]),
            &GeneratorMatrix::diag(&[1.0, 1.0]),
            &tol(),
        )
        .unwrap();
        assert!(!v.equivalent);
        assert!(v.reason.contains(&ReasonCode::DimsMismatch));

        let v = decide_topological(
            &GeneratorMatrix::jordan_complex(1, 0.0, 1.0),
            &GeneratorMatrix::jordan_complex(1, 0.0, 2.0),
            &tol(),
        )
        .unwrap();
        assert!(v.equivalent);
        assert!((v.alpha.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn topological_time_reversal() {
        let a = GeneratorMatrix::diag(&[-1.0, -2.0, 3.0]);
        let v = decide_topological(&a, &time_reverse(&a), &tol()).unwrap();
        assert!(v.equivalent && v.time_reversed);
    }

    #[test]
    fn holder_examples() {
        let v = decide_holder(
            &GeneratorMatrix::jordan_real(2, 1.0),
            &GeneratorMatrix::jordan_complex(1, 1.0, 1.0),
            &tol(),
        )
        .unwrap();
        assert!(v.equivalent);
        assert_eq!(v.alpha, Some(1.0));

        let v = decide_holder(
            &GeneratorMatrix::diag(&[-1.0, 1.0]),
            &GeneratorMatrix::diag(&[-0.5, 1.0]),
            &tol(),
        )
        .unwrap();
        assert!(!v.equivalent);
        assert_eq!(v.reason, vec![ReasonCode::LyapunovMismatch]);

        let a = GeneratorMatrix::from_rows(&[&[0.3, -1.0, 0.2], &[1.0, 0.1, 0.0], &[0.5, 0.0, -0.7]]);
        let v = decide_holder(&a, &a, &tol()).unwrap();
        assert!(v.equivalent);
        assert_eq!(v.alpha, Some(1.0));
    }

    #[test]
    fn smooth_examples() {
        let v = decide_smooth(
            &GeneratorMatrix::jordan_real(2, 1.0),
            &GeneratorMatrix::jordan_real(2, 2.0),
            &tol(),
        )
        .unwrap();
        assert!(v.equivalent);
        assert!((v.alpha.unwrap() - 0.5).abs() < 1e-12);

        let v = decide_smooth(
            &GeneratorMatrix::jordan_real(2, 0.0),
            &GeneratorMatrix::zeros(2),
            &tol(),
        )
        .unwrap();
        assert!(!v.equivalent);

        let v = decide_smooth(
            &GeneratorMatrix::diag(&[1.0, 2.0]),
            &GeneratorMatrix::diag(&[2.0, 4.0]),
            &tol(),
        )
        .unwrap();
        assert!(v.equivalent);
        assert!((v.alpha.unwrap() - 0.5).abs() < 1e-12);

        let v = decide_smooth(
            &GeneratorMatrix::jordan_real(2, 1.0),
            &GeneratorMatrix::identity(2),
            &tol(),
        )
        .unwrap();
        assert!(!v.equivalent);
    }

    #[test]
    fn smooth_under_conjugation() {
        let a = GeneratorMatrix::block_diag(&[
            GeneratorMatrix::jordan_real(2, -1.0),
            GeneratorMatrix::jordan_complex(1, 0.0, 2.0),
        ]);
        let q = Matrix::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.3 * (i + 2 * j) as f64 / 4.0 });
        let b = a.conjugated(&q).unwrap();
        for v in [
            decide_topological(&a, &b, &tol()).unwrap(),
            decide_holder(&a, &b, &tol()).unwrap(),
            decide_smooth(&a, &b, &tol()).unwrap(),
        ] {
            assert!(v.equivalent, "{v:?}");
            assert!((v.alpha.unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let r = decide_topological(&GeneratorMatrix::identity(2), &GeneratorMatrix::identity(3), &tol());
        assert!(matches!(r, Err(LinflowError::DimensionMismatch { .. })));
    }
}
