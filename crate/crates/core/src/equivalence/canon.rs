//! Canonical representatives in dimension ≤ 2 (real) and complex dimension ≤ 2.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::deciders::{check_same_dim, decide_holder};
use super::verdict::{EquivalenceLevel, EquivalenceVerdict, ReasonCode};
use crate::error::{LinflowError, Result};
use crate::flowstruct::realify;
use crate::matrix::{CMatrix, GeneratorMatrix, Matrix, Origin};
use crate::numcore::{block_sizes, eigenvalues};
use crate::tolerance::ToleranceProfile;

/// Representative of an equivalence class together with its family parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub label: String,
    pub parameters: Vec<(String, f64)>,
    /// Real entries of the representative (realified for complex inputs).
    pub entries: Vec<Vec<f64>>,
    pub origin: Origin,
}

impl CanonicalForm {
    fn real(label: &str, parameters: &[(&str, f64)], m: Matrix) -> Self {
        CanonicalForm {
            label: label.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            entries: rows(&m),
            origin: Origin::RealInput,
        }
    }

    fn complex(label: &str, parameters: &[(&str, f64)], m: CMatrix) -> Self {
        let r = realify(&m).expect("catalog matrices are finite");
        CanonicalForm {
            label: label.into(),
            parameters: parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            entries: rows(r.matrix()),
            origin: Origin::RealifiedComplex,
        }
    }

    pub fn matrix(&self) -> GeneratorMatrix {
        let d = self.entries.len();
        let m = Matrix::from_fn(d, d, |i, j| self.entries[i][j]);
        GeneratorMatrix::with_origin(m, self.origin).expect("catalog matrices are valid")
    }

    /// Same class: equal labels and parameters within `alpha_match_tol`.
    pub fn same_class(&self, other: &CanonicalForm, tol: &ToleranceProfile) -> bool {
        self.label == other.label
            && self.parameters.len() == other.parameters.len()
            && self
                .parameters
                .iter()
                .zip(&other.parameters)
                .all(|((k, x), (l, y))| k == l && tol.ratio_eq(*x, *y))
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().cloned().collect()).collect()
}

fn rm(rows: &[&[f64]]) -> Matrix {
    Matrix::from_fn(rows.len(), rows.len(), |i, j| rows[i][j])
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cm(entries: &[Complex64]) -> CMatrix {
    let n = if entries.len() == 1 { 1 } else { 2 };
    CMatrix::from_row_slice(n, n, entries)
}

/// Clean up `-0.0` so labels and parameters print and compare uniformly.
fn nz(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Eigen-structure of a real 2×2 generator.
enum Planar {
    Zero,
    Nilpotent,
    /// Diagonalizable with real eigenvalues.
    Real(f64, f64),
    /// Single nonzero eigenvalue with a 2-block.
    Defective,
    /// `a ± ib`, `b > 0`.
    Spiral(f64, f64),
}

fn planar(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<Planar> {
    let spec = eigenvalues(a, tol)?;
    let clusters = spec.clusters();
    if clusters.len() == 1 && clusters[0].is_real() && clusters[0].multiplicity == 2 {
        let z = clusters[0].value;
        let sizes = block_sizes(a.matrix(), z, 2, tol.rank_tol)
            .ok_or_else(|| LinflowError::numerical("canon2", "inconsistent rank chain"))?;
        return Ok(match (z.re == 0.0, sizes.as_slice()) {
            (true, [2]) => Planar::Nilpotent,
            (true, _) => Planar::Zero,
            (false, [2]) => Planar::Defective,
            (false, _) => Planar::Real(z.re, z.re),
        });
    }
    if clusters.len() == 1 && !clusters[0].is_real() {
        return Ok(Planar::Spiral(clusters[0].value.re, clusters[0].value.im));
    }
    let v: Vec<f64> = spec.eigenvalues.iter().map(|z| z.re).collect();
    Ok(Planar::Real(v[0], v[1]))
}

/// `ν/μ` where `μ` has the larger modulus.
fn ratio_pair(x: f64, y: f64) -> f64 {
    let (big, small) = if x.abs() >= y.abs() { (x, y) } else { (y, x) };
    nz(small / big)
}

fn canon_real_1(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<CanonicalForm> {
    let z = eigenvalues(a, tol)?.eigenvalues[0].re;
    Ok(if z == 0.0 {
        CanonicalForm::real("[0]", &[], rm(&[&[0.0]]))
    } else {
        CanonicalForm::real("[1]", &[], rm(&[&[1.0]]))
    })
}

fn canon_real_2(a: &GeneratorMatrix, level: Level, tol: &ToleranceProfile) -> Result<CanonicalForm> {
    let i2 = || CanonicalForm::real("I2", &[], Matrix::identity(2, 2));
    let diag_a = |r: f64| CanonicalForm::real("diag[a,1]", &[("a", r)], rm(&[&[r, 0.0], &[0.0, 1.0]]));
    Ok(match planar(a, tol)? {
        Planar::Zero => CanonicalForm::real("O2", &[], Matrix::zeros(2, 2)),
        Planar::Nilpotent => CanonicalForm::real("J2", &[], rm(&[&[0.0, 1.0], &[0.0, 0.0]])),
        Planar::Spiral(re, _) if re == 0.0 => CanonicalForm::real("J1(i)", &[], rm(&[&[0.0, -1.0], &[1.0, 0.0]])),
        Planar::Real(x, y) => {
            let r = ratio_pair(x, y);
            match level {
                Level::Topological => {
                    if r < 0.0 {
                        CanonicalForm::real("diag[-1,1]", &[], rm(&[&[-1.0, 0.0], &[0.0, 1.0]]))
                    } else if r == 0.0 {
                        CanonicalForm::real("diag[0,1]", &[], rm(&[&[0.0, 0.0], &[0.0, 1.0]]))
                    } else {
                        i2()
                    }
                }
                _ => diag_a(r),
            }
        }
        Planar::Defective => match level {
            Level::Smooth | Level::Lipschitz => CanonicalForm::real("J2(1)", &[], rm(&[&[1.0, 1.0], &[0.0, 1.0]])),
            Level::Holder => diag_a(1.0),
            Level::Topological => i2(),
        },
        Planar::Spiral(re, im) => match level {
            Level::Smooth => {
                let b = im / re.abs();
                CanonicalForm::real("[[1,-b],[b,1]]", &[("b", b)], rm(&[&[1.0, -b], &[b, 1.0]]))
            }
            Level::Lipschitz | Level::Holder => diag_a(1.0),
            Level::Topological => i2(),
        },
    })
}

/// Eigen-structure of a complex matrix of size ≤ 2.
enum ComplexShape {
    Zero,
    Nilpotent,
    /// Single eigenvalue with a 2-block.
    Defective(Complex64),
    Diagonal(Vec<Complex64>),
}

fn complex_shape(m: &CMatrix, tol: &ToleranceProfile) -> Result<ComplexShape> {
    let n = m.nrows();
    let norm = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let r = tol.eig_radius(norm);
    let snap = |z: Complex64| {
        c(
            if z.re.abs() < r { 0.0 } else { z.re },
            if z.im.abs() < r { 0.0 } else { z.im },
        )
    };
    if n == 1 {
        let z = snap(m[(0, 0)]);
        return Ok(if z == c(0.0, 0.0) {
            ComplexShape::Zero
        } else {
            ComplexShape::Diagonal(vec![z])
        });
    }
    let (p, q, s, t) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let half_tr = (p + t) * 0.5;
    let disc = ((p - t) * 0.5).powi(2) + q * s;
    let root = disc.sqrt();
    let (z1, z2) = (half_tr + root, half_tr - root);
    // a coalesced pair is decided by the rank of M − zI, as in the real case
    let merge = (z1 - z2).norm() <= tol.eig_cluster_tol.sqrt() * (1.0 + norm);
    if merge {
        let z = snap(half_tr);
        let shifted = m - CMatrix::identity(2, 2) * z;
        let sn = shifted.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        let defective = sn > tol.rank_tol.sqrt() * (1.0 + norm);
        return Ok(match (z == c(0.0, 0.0), defective) {
            (true, false) => ComplexShape::Zero,
            (true, true) => ComplexShape::Nilpotent,
            (false, true) => ComplexShape::Defective(z),
            (false, false) => ComplexShape::Diagonal(vec![z, z]),
        });
    }
    Ok(ComplexShape::Diagonal(vec![snap(z1), snap(z2)]))
}

fn canon_complex(m: &CMatrix, level: Level, tol: &ToleranceProfile) -> Result<CanonicalForm> {
    let n = m.nrows();
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let i = c(0.0, 1.0);
    let shape = complex_shape(m, tol)?;
    if n == 1 {
        return Ok(match shape {
            ComplexShape::Diagonal(z) if z[0].re == 0.0 => CanonicalForm::complex("[i]", &[], cm(&[i])),
            ComplexShape::Diagonal(z) => match level {
                Level::Smooth => {
                    let b = nz(z[0].im / z[0].re);
                    CanonicalForm::complex("[1+ib]", &[("b", b)], cm(&[c(1.0, b)]))
                }
                _ => CanonicalForm::complex("[1]", &[], cm(&[one])),
            },
            _ => CanonicalForm::complex("[0]", &[], cm(&[zero])),
        });
    }
    let diag2 = |label: &str, params: &[(&str, f64)], x: Complex64, y: Complex64| {
        CanonicalForm::complex(label, params, cm(&[x, zero, zero, y]))
    };
    Ok(match shape {
        ComplexShape::Zero => CanonicalForm::complex("O", &[], CMatrix::zeros(2, 2)),
        ComplexShape::Nilpotent => CanonicalForm::complex("J2", &[], cm(&[zero, one, zero, zero])),
        ComplexShape::Defective(z) if z.re == 0.0 => {
            CanonicalForm::complex("[[i,1],[0,i]]", &[], cm(&[i, one, zero, i]))
        }
        ComplexShape::Defective(z) => {
            let b = nz(z.im / z.re);
            match level {
                Level::Smooth => CanonicalForm::complex(
                    "[[1+ib,1],[0,1+ib]]",
                    &[("b", b)],
                    cm(&[c(1.0, b), one, zero, c(1.0, b)]),
                ),
                Level::Lipschitz if b == 0.0 => {
                    CanonicalForm::complex("[[1,1],[0,1]]", &[], cm(&[one, one, zero, one]))
                }
                Level::Lipschitz => CanonicalForm::complex(
                    "[[1+ib,1],[0,1+ib]]",
                    &[("b", b.abs())],
                    cm(&[c(1.0, b.abs()), one, zero, c(1.0, b.abs())]),
                ),
                Level::Holder => diag2("diag[a,1]", &[("a", 1.0)], one, one),
                Level::Topological => diag2("I", &[], one, one),
            }
        }
        ComplexShape::Diagonal(z) => {
            let (z1, z2) = (z[0], z[1]);
            let central = [z1.re == 0.0, z2.re == 0.0];
            match central {
                [true, true] => {
                    // both on the imaginary axis, at least one nonzero
                    let (big, small) = if z1.im.abs() >= z2.im.abs() {
                        (z1.im, z2.im)
                    } else {
                        (z2.im, z1.im)
                    };
                    let a = nz(small / big);
                    match level {
                        Level::Smooth => diag2("diag[ia,i]", &[("a", a)], c(0.0, a), i),
                        _ => diag2("diag[ia,i]", &[("a", a.abs())], c(0.0, a.abs()), i),
                    }
                }
                [false, false] => {
                    let (big, small) = if z1.re.abs() >= z2.re.abs() { (z1, z2) } else { (z2, z1) };
                    match level {
                        Level::Smooth => {
                            let mut best: Option<(f64, f64, f64)> = None;
                            for (p, q) in [(big, small), (small, big)] {
                                if p.re.abs() != big.re.abs() {
                                    continue;
                                }
                                let cand = (nz(q.re / p.re), nz(q.im / p.re), nz(p.im / p.re));
                                if best.map_or(true, |b| cand.partial_cmp(&b) == Some(std::cmp::Ordering::Less)) {
                                    best = Some(cand);
                                }
                            }
                            let (a, b, cc) = best.expect("at least one orientation");
                            diag2("diag[a+ib,1+ic]", &[("a", a), ("b", b), ("c", cc)], c(a, b), c(1.0, cc))
                        }
                        Level::Lipschitz | Level::Holder => {
                            let a = nz(small.re / big.re);
                            diag2("diag[a,1]", &[("a", a)], c(a, 0.0), one)
                        }
                        Level::Topological => {
                            if small.re * big.re < 0.0 {
                                diag2("diag[-1,1]", &[], c(-1.0, 0.0), one)
                            } else {
                                diag2("I", &[], one, one)
                            }
                        }
                    }
                }
                _ => {
                    let (hyp, cen) = if central[0] { (z2, z1) } else { (z1, z2) };
                    if cen.im == 0.0 {
                        match level {
                            Level::Smooth => {
                                let cc = nz(hyp.im / hyp.re);
                                diag2(
                                    "diag[a+ib,1+ic]",
                                    &[("a", 0.0), ("b", 0.0), ("c", cc)],
                                    zero,
                                    c(1.0, cc),
                                )
                            }
                            Level::Lipschitz | Level::Holder => diag2("diag[a,1]", &[("a", 0.0)], zero, one),
                            Level::Topological => diag2("diag[0,1]", &[], zero, one),
                        }
                    } else {
                        match level {
                            Level::Smooth => {
                                let (a, b, cc) = (0.0, nz(cen.im / hyp.re), nz(hyp.im / hyp.re));
                                diag2("diag[a+ib,1+ic]", &[("a", a), ("b", b), ("c", cc)], c(a, b), c(1.0, cc))
                            }
                            Level::Lipschitz | Level::Holder => {
                                let b = (cen.im / hyp.re).abs();
                                diag2("diag[ib,1]", &[("b", b)], c(0.0, b), one)
                            }
                            Level::Topological => diag2("diag[i,1]", &[], i, one),
                        }
                    }
                }
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Level {
    Topological,
    Holder,
    Lipschitz,
    Smooth,
}

fn catalog_level(level: EquivalenceLevel) -> Result<Level> {
    Ok(match level {
        EquivalenceLevel::Topological | EquivalenceLevel::SomeHolder => Level::Topological,
        EquivalenceLevel::AllHolder => Level::Holder,
        EquivalenceLevel::Lipschitz => Level::Lipschitz,
        EquivalenceLevel::Smooth => Level::Smooth,
        other => return Err(LinflowError::Domain(format!("no catalog exists at level {other}"))),
    })
}

/// Recover the complex matrix from its realification.
pub fn derealify(a: &GeneratorMatrix) -> Result<CMatrix> {
    if a.origin() != Origin::RealifiedComplex {
        return Err(LinflowError::Domain(
            "generator is not a realified complex matrix".into(),
        ));
    }
    let n = a.dim() / 2;
    let m = a.matrix();
    Ok(CMatrix::from_fn(n, n, |j, k| {
        c(m[(2 * j, 2 * k)], m[(2 * j + 1, 2 * k)])
    }))
}

/// Canonical representative of `A` at `level`, for real `d ≤ 2` or complex
/// dimension ≤ 2 (realified inputs).
pub fn canon2(a: &GeneratorMatrix, level: EquivalenceLevel, tol: &ToleranceProfile) -> Result<CanonicalForm> {
    let lv = catalog_level(level)?;
    match (a.origin(), a.dim()) {
        (Origin::RealifiedComplex, 2 | 4) => canon_complex(&derealify(a)?, lv, tol),
        (Origin::RealInput, 1) => canon_real_1(a, tol),
        (Origin::RealInput, 2) => canon_real_2(a, lv, tol),
        (_, d) => Err(LinflowError::UnsupportedDimension {
            dim: d,
            detail: "catalogs exist for real dimension ≤ 2 and complex dimension ≤ 2".into(),
        }),
    }
}

/// Canonical representative of a complex matrix of size ≤ 2.
pub fn canon2_complex(m: &CMatrix, level: EquivalenceLevel, tol: &ToleranceProfile) -> Result<CanonicalForm> {
    canon2(&realify(m)?, level, tol)
}

/// Lipschitz equivalence, decided through the low-dimensional catalogs.
pub fn decide_lipschitz(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: &ToleranceProfile,
) -> Result<EquivalenceVerdict> {
    check_same_dim(a, b)?;
    let small = match (a.origin(), b.origin()) {
        (Origin::RealInput, Origin::RealInput) => a.dim() <= 2,
        (Origin::RealifiedComplex, Origin::RealifiedComplex) => a.dim() <= 4,
        _ => false,
    };
    if !small {
        return Err(LinflowError::OutOfScope(
            "Lipschitz classification relies on a similarity notion outside this library beyond dimension 2".into(),
        ));
    }
    let level = EquivalenceLevel::Lipschitz;
    let (ca, cb) = (canon2(a, level, tol)?, canon2(b, level, tol)?);
    if !ca.same_class(&cb, tol) {
        return Ok(EquivalenceVerdict::no(level, vec![ReasonCode::CatalogMismatch]));
    }
    // Lipschitz implies all-Hölder, whose decider supplies the witness α
    let h = decide_holder(a, b, tol)?;
    let alpha = h.alpha.unwrap_or(1.0);
    Ok(EquivalenceVerdict::yes(level, alpha, vec![ReasonCode::CatalogMatch]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn label(a: &GeneratorMatrix, level: EquivalenceLevel) -> (String, Vec<f64>) {
        let f = canon2(a, level, &tol()).unwrap();
        (f.label, f.parameters.into_iter().map(|(_, v)| v).collect())
    }

    #[test]
    fn real_examples() {
        use EquivalenceLevel::*;
        let a = GeneratorMatrix::diag(&[-3.0, 5.0]);
        assert_eq!(label(&a, Topological).0, "diag[-1,1]");
        assert_eq!(label(&a, AllHolder), ("diag[a,1]".into(), vec![-0.6]));
        let j = GeneratorMatrix::jordan_real(2, 1.0);
        assert_eq!(label(&j, AllHolder), ("diag[a,1]".into(), vec![1.0]));
        assert_eq!(label(&j, Lipschitz).0, "J2(1)");
        let s = GeneratorMatrix::jordan_complex(1, 1.0, 2.0);
        assert_eq!(label(&s, Lipschitz), ("diag[a,1]".into(), vec![1.0]));
        assert_eq!(label(&s, Smooth), ("[[1,-b],[b,1]]".into(), vec![2.0]));
        let s = GeneratorMatrix::jordan_complex(1, -2.0, 2.0);
        assert_eq!(label(&s, Smooth), ("[[1,-b],[b,1]]".into(), vec![1.0]));
        assert_eq!(
            label(&GeneratorMatrix::diag(&[-1.0, -2.0]), Smooth),
            ("diag[a,1]".into(), vec![0.5])
        );
        assert_eq!(label(&GeneratorMatrix::diag(&[0.0, -2.0]), Topological).0, "diag[0,1]");
        assert_eq!(label(&GeneratorMatrix::zeros(2), Smooth).0, "O2");
        assert_eq!(label(&GeneratorMatrix::jordan_real(2, 0.0), Topological).0, "J2");
        assert_eq!(label(&GeneratorMatrix::jordan_complex(1, 0.0, 3.0), Smooth).0, "J1(i)");
        assert_eq!(label(&GeneratorMatrix::diag(&[-4.0]), Smooth).0, "[1]");
    }

    #[test]
    fn representative_is_in_its_own_class() {
        use EquivalenceLevel::*;
        let samples = [
            GeneratorMatrix::diag(&[-3.0, 5.0]),
            GeneratorMatrix::jordan_real(2, -2.0),
            GeneratorMatrix::jordan_complex(1, 0.5, 2.0),
            GeneratorMatrix::diag(&[0.0, 2.0]),
        ];
        for a in &samples {
            for level in [Topological, AllHolder, Lipschitz, Smooth] {
                let f = canon2(a, level, &tol()).unwrap();
                let g = canon2(&f.matrix(), level, &tol()).unwrap();
                assert!(f.same_class(&g, &tol()), "{level}: {f:?} vs {g:?}");
            }
        }
    }

    #[test]
    fn complex_examples() {
        use EquivalenceLevel::*;
        let one = |z: Complex64| CMatrix::from_element(1, 1, z);
        let f = canon2_complex(&one(c(2.0, 6.0)), Smooth, &tol()).unwrap();
        assert_eq!(f.label, "[1+ib]");
        assert_eq!(f.parameters[0].1, 3.0);
        assert_eq!(
            canon2_complex(&one(c(2.0, 6.0)), AllHolder, &tol()).unwrap().label,
            "[1]"
        );
        assert_eq!(
            canon2_complex(&one(c(0.0, 2.0)), Topological, &tol()).unwrap().label,
            "[i]"
        );

        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(canon2_complex(&m, Topological, &tol()).unwrap().label, "diag[i,1]");
        let f = canon2_complex(&m, AllHolder, &tol()).unwrap();
        assert_eq!((f.label.as_str(), f.parameters[0].1), ("diag[ib,1]", 0.5));

        let m = CMatrix::from_row_slice(2, 2, &[c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 2.0)]);
        let f = canon2_complex(&m, Smooth, &tol()).unwrap();
        assert_eq!((f.label.as_str(), f.parameters[0].1), ("diag[ia,i]", -0.5));
        let f = canon2_complex(&m, Lipschitz, &tol()).unwrap();
        assert_eq!(f.parameters[0].1, 0.5);

        let m = CMatrix::from_row_slice(2, 2, &[c(-1.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 1.0)]);
        let f = canon2_complex(&m, Lipschitz, &tol()).unwrap();
        assert_eq!((f.label.as_str(), f.parameters[0].1), ("[[1+ib,1],[0,1+ib]]", 1.0));
        assert_eq!(canon2_complex(&m, AllHolder, &tol()).unwrap().label, "diag[a,1]");
    }

    #[test]
    fn lipschitz_decider() {
        let v = decide_lipschitz(
            &GeneratorMatrix::jordan_complex(1, 1.0, 2.0),
            &GeneratorMatrix::identity(2),
            &tol(),
        )
        .unwrap();
        assert!(v.equivalent);
        let v = decide_lipschitz(
            &GeneratorMatrix::jordan_real(2, 1.0),
            &GeneratorMatrix::identity(2),
            &tol(),
        )
        .unwrap();
        assert!(!v.equivalent);
        let r = decide_lipschitz(&GeneratorMatrix::identity(3), &GeneratorMatrix::identity(3), &tol());
        assert!(matches!(r, Err(LinflowError::OutOfScope(_))));
    }

    #[test]
    fn higher_dimension_is_unsupported() {
        let r = canon2(&GeneratorMatrix::identity(3), EquivalenceLevel::Topological, &tol());
        assert!(matches!(r, Err(LinflowError::UnsupportedDimension { dim: 3, .. })));
    }
}
