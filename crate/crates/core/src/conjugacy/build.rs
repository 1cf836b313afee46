use super::map::{ConjugacyMap, MapKind};
use crate::equivalence::EquivalenceVerdict;
use crate::error::{LinflowError, Result};
use crate::flowstruct::{real_jordan, time_reverse, Part, RealJordanDecomposition};
use crate::matrix::{block_diag, GeneratorMatrix, Matrix};
use crate::numcore::{find_similarity, inverse_condition};
use crate::tolerance::ToleranceProfile;

fn nonzero(name: &str, v: f64) -> Result<()> {
    if v == 0.0 || !v.is_finite() {
        return Err(LinflowError::Domain(format!(
            "{name} must be finite and nonzero, got {v}"
        )));
    }
    Ok(())
}

/// `h_a`, carrying the `aI_m` flow to the `J_m(a)` flow.
pub fn build_block_to_diag(m: usize, a: f64) -> Result<ConjugacyMap> {
    if m == 0 {
        return Err(LinflowError::Domain("block size must be positive".into()));
    }
    nonzero("a", a)?;
    Ok(ConjugacyMap::from_kind(MapKind::BlockToDiag { m, a }))
}

/// Carries the flow of `diag[J_1(a+ib), …, J_1(a+ib)]` (`m` planar blocks)
/// to that of the real Jordan block of `a+ib`.
pub fn build_complex_block_to_diag(m: usize, a: f64, b: f64) -> Result<ConjugacyMap> {
    if m == 0 {
        return Err(LinflowError::Domain("block size must be positive".into()));
    }
    nonzero("a", a)?;
    nonzero("b", b)?;
    Ok(ConjugacyMap::from_kind(MapKind::ComplexBlockToDiag { m, a, b }))
}

/// Carries the `J_1(a+ib)` flow to the `aI_2` flow.
pub fn build_unwind(a: f64, b: f64) -> Result<ConjugacyMap> {
    nonzero("a", a)?;
    nonzero("b", b)?;
    Ok(ConjugacyMap::from_kind(MapKind::Unwind { a, b }))
}

/// Signed power map with exponents `p_j > 0`.
pub fn power_map(exponents: Vec<f64>) -> Result<ConjugacyMap> {
    if exponents.is_empty() || exponents.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(LinflowError::Domain("power exponents must be positive".into()));
    }
    Ok(ConjugacyMap::from_kind(MapKind::Power { exponents }))
}

/// Power map carrying the `diag[a]` flow to the `diag[b]` flow at time scale `alpha`.
pub fn build_power_map(a: &[f64], b: &[f64], alpha: f64) -> Result<ConjugacyMap> {
    if a.len() != b.len() {
        return Err(LinflowError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(LinflowError::Domain(format!("alpha must be positive, got {alpha}")));
    }
    for (x, y) in a.iter().zip(b) {
        nonzero("exponent", *x)?;
        nonzero("exponent", *y)?;
        if x.signum() != y.signum() {
            return Err(LinflowError::Domain(format!("exponents {x} and {y} differ in sign")));
        }
    }
    power_map(a.iter().zip(b).map(|(x, y)| alpha * y / x).collect())
}

pub fn linear_map(q: Matrix) -> Result<ConjugacyMap> {
    if !q.is_square() {
        return Err(LinflowError::NotSquare {
            rows: q.nrows(),
            cols: q.ncols(),
        });
    }
    let inverse = q
        .clone()
        .try_inverse()
        .ok_or_else(|| LinflowError::numerical("linear_map", "matrix is singular"))?;
    Ok(ConjugacyMap::from_kind(MapKind::Linear { matrix: q, inverse }))
}

/// `f₁ × … × f_k` with respect to the splitting given by the part bases.
pub fn product_map(parts: Vec<(ConjugacyMap, Matrix)>) -> Result<ConjugacyMap> {
    let d: usize = parts.iter().map(|(h, _)| h.dim_in()).sum();
    for (h, basis) in &parts {
        if basis.nrows() != d || basis.ncols() != h.dim_in() {
            return Err(LinflowError::DimensionMismatch {
                expected: h.dim_in(),
                found: basis.ncols(),
            });
        }
    }
    let cols: Vec<&Matrix> = parts.iter().map(|(_, b)| b).collect();
    let mut basis = Matrix::zeros(d, d);
    let mut off = 0;
    for b in cols {
        basis.columns_mut(off, b.ncols()).copy_from(b);
        off += b.ncols();
    }
    if d == 0 || inverse_condition(&basis) <= ToleranceProfile::default().rank_tol {
        return Err(LinflowError::Domain("part bases are not complementary".into()));
    }
    let basis_inverse = basis.clone().try_inverse().expect("checked above");
    Ok(ConjugacyMap::from_kind(MapKind::Product {
        basis,
        basis_inverse,
        parts: parts.into_iter().map(|(h, _)| h).collect(),
    }))
}

fn coordinate_product(parts: Vec<ConjugacyMap>) -> ConjugacyMap {
    let d: usize = parts.iter().map(|h| h.dim_in()).sum();
    ConjugacyMap::from_kind(MapKind::Product {
        basis: Matrix::identity(d, d),
        basis_inverse: Matrix::identity(d, d),
        parts,
    })
}

/// Reduction of the real Jordan flow to `diag[Λ_S, J_C, Λ_U]`, with the
/// exponent of each hyperbolic coordinate and the central Jordan matrix.
struct Reduction {
    map: ConjugacyMap,
    stable: Vec<f64>,
    unstable: Vec<f64>,
    central: Matrix,
}

fn reduction(j: &RealJordanDecomposition) -> Result<Reduction> {
    let mut parts = Vec::new();
    let (mut stable, mut unstable, mut central) = (vec![], vec![], vec![]);
    for blk in &j.blocks {
        let part = Part::of(blk);
        let (a, b, m) = (blk.z.re, blk.z.im, blk.m);
        let h = match part {
            Part::Central => {
                central.push(blk.matrix());
                ConjugacyMap::identity(blk.real_size)
            }
            _ if blk.is_real() => build_block_to_diag(m, a)?.inverse(),
            _ => {
                let unwind = coordinate_product(vec![build_unwind(a, b)?; m]);
                build_complex_block_to_diag(m, a, b)?.inverse().then(unwind)
            }
        };
        match part {
            Part::Stable => stable.extend(std::iter::repeat_n(a, blk.real_size)),
            Part::Unstable => unstable.extend(std::iter::repeat_n(a, blk.real_size)),
            Part::Central => {}
        }
        parts.push(h);
    }
    Ok(Reduction {
        map: coordinate_product(parts),
        stable,
        unstable,
        central: block_diag(&central),
    })
}

/// Conjugacy `h` with `h(e^{tA}x) = e^{αtB}h(x)`, α taken from `verdict`.
///
/// Built as `P_B ∘ R_B⁻¹ ∘ M ∘ R_A ∘ P_A⁻¹` where `P` are real Jordan bases,
/// `R` the blockwise reductions and `M` a power map on the hyperbolic
/// coordinates times a linear similarity on the central ones. A linear
/// similarity is returned directly when one exists.
pub fn build_pipeline(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    verdict: &EquivalenceVerdict,
    tol: &ToleranceProfile,
) -> Result<ConjugacyMap> {
    if a.dim() != b.dim() {
        return Err(LinflowError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if !verdict.equivalent {
        return Err(LinflowError::Domain("no conjugacy for an inequivalent pair".into()));
    }
    let alpha = verdict.alpha.unwrap_or(1.0);
    nonzero("alpha", alpha)?;
    // negative α: the reversed flow of A is conjugate to B at time scale |α|
    let a1 = if alpha < 0.0 { time_reverse(a) } else { a.clone() };
    let b1 = b.scaled(alpha.abs());
    if let Some(q) = find_similarity(&a1, &b1, tol)? {
        return linear_map(q);
    }
    let (ja, jb) = (real_jordan(&a1, tol)?, real_jordan(&b1, tol)?);
    let (ra, rb) = (reduction(&ja)?, reduction(&jb)?);
    if ra.stable.len() != rb.stable.len() || ra.unstable.len() != rb.unstable.len() {
        return Err(LinflowError::Domain(
            "verdict does not match the hyperbolic dimensions".into(),
        ));
    }
    let mut middle = Vec::new();
    if !ra.stable.is_empty() {
        middle.push(build_power_map(&ra.stable, &rb.stable, 1.0)?);
    }
    if ra.central.nrows() > 0 {
        let (ca, cb) = (GeneratorMatrix::new(ra.central)?, GeneratorMatrix::new(rb.central)?);
        let q = find_similarity(&ca, &cb, tol)?.ok_or_else(|| {
            LinflowError::numerical("build_pipeline", "central parts are not similar at the verdict's alpha")
        })?;
        middle.push(linear_map(q)?);
    }
    if !ra.unstable.is_empty() {
        middle.push(build_power_map(&ra.unstable, &rb.unstable, 1.0)?);
    }
    let h = ConjugacyMap::from_kind(MapKind::Composition {
        maps: vec![
            ConjugacyMap::from_kind(MapKind::Linear {
                matrix: ja.inverse.clone(),
                inverse: ja.basis.clone(),
            }),
            ra.map,
            coordinate_product(middle),
            rb.map.inverse(),
            ConjugacyMap::from_kind(MapKind::Linear {
                matrix: jb.basis.clone(),
                inverse: jb.inverse.clone(),
            }),
        ],
    });
    Ok(simplified(h))
}

fn is_identity(h: &ConjugacyMap) -> bool {
    match h.kind() {
        MapKind::Linear { matrix, .. } => *matrix == Matrix::identity(matrix.nrows(), matrix.ncols()),
        _ => false,
    }
}

/// Push inversions to the leaves, flatten compositions and drop identity
/// factors. The represented map is unchanged.
pub(crate) fn simplified(h: ConjugacyMap) -> ConjugacyMap {
    let inv = h.is_inverted();
    let d = h.dim_in();
    match h.kind {
        MapKind::Linear { matrix, inverse } => {
            let (matrix, inverse) = if inv { (inverse, matrix) } else { (matrix, inverse) };
            ConjugacyMap::from_kind(MapKind::Linear { matrix, inverse })
        }
        MapKind::Power { exponents } => {
            let exponents: Vec<f64> = if inv {
                exponents.iter().map(|p| 1.0 / p).collect()
            } else {
                exponents
            };
            if exponents.iter().all(|&p| p == 1.0) {
                ConjugacyMap::identity(d)
            } else {
                ConjugacyMap::from_kind(MapKind::Power { exponents })
            }
        }
        MapKind::BlockToDiag { m: 1, .. } => ConjugacyMap::identity(1),
        MapKind::Composition { maps } => {
            let ordered: Vec<ConjugacyMap> = if inv {
                maps.into_iter().rev().map(|m| m.inverse()).collect()
            } else {
                maps
            };
            let mut flat: Vec<ConjugacyMap> = Vec::new();
            for m in ordered.into_iter().map(simplified) {
                match m.kind {
                    MapKind::Composition { maps } => flat.extend(maps),
                    _ => flat.push(m),
                }
            }
            let mut out: Vec<ConjugacyMap> = Vec::new();
            for m in flat {
                if is_identity(&m) {
                    continue;
                }
                if let (Some(prev), MapKind::Linear { matrix, inverse }) = (out.last_mut(), &m.kind) {
                    if let MapKind::Linear {
                        matrix: pm,
                        inverse: pi,
                    } = &prev.kind
                    {
                        let merged = MapKind::Linear {
                            matrix: matrix * pm,
                            inverse: pi * inverse,
                        };
                        *prev = ConjugacyMap::from_kind(merged);
                        if is_identity(prev) {
                            out.pop();
                        }
                        continue;
                    }
                }
                out.push(m);
            }
            match out.len() {
                0 => ConjugacyMap::identity(d),
                1 => out.pop().expect("one element"),
                _ => ConjugacyMap::from_kind(MapKind::Composition { maps: out }),
            }
        }
        MapKind::Product {
            basis,
            basis_inverse,
            parts,
        } => {
            let parts: Vec<ConjugacyMap> = parts
                .into_iter()
                .map(|p| simplified(if inv { p.inverse() } else { p }))
                .collect();
            let coordinate = basis == Matrix::identity(d, d);
            if parts.iter().all(|p| matches!(p.kind, MapKind::Linear { .. })) {
                let (mut fw, mut bw) = (vec![], vec![]);
                for p in &parts {
                    if let MapKind::Linear { matrix, inverse } = &p.kind {
                        fw.push(matrix.clone());
                        bw.push(inverse.clone());
                    }
                }
                let matrix = &basis * block_diag(&fw) * &basis_inverse;
                let inverse = &basis * block_diag(&bw) * &basis_inverse;
                return ConjugacyMap::from_kind(MapKind::Linear { matrix, inverse });
            }
            if coordinate && parts.len() == 1 {
                return parts.into_iter().next().expect("one part");
            }
            ConjugacyMap::from_kind(MapKind::Product {
                basis,
                basis_inverse,
                parts,
            })
        }
        kind => {
            let mut out = ConjugacyMap::from_kind(kind);
            out.inverted = inv;
            out
        }
    }
}
