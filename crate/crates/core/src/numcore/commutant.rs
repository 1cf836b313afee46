//! Intertwiners `Q` with `QA = BQ`, and the randomized search for an
//! invertible one.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::eigen::eigenvalues;
use super::linalg::{inverse_condition, kernel_basis};
use super::structure::block_sizes;
use crate::error::{LinflowError, Result};
use crate::matrix::{spectral_norm, GeneratorMatrix, Matrix};
use crate::tolerance::ToleranceProfile;

/// Number of random combinations tried before giving up on a witness.
pub const SIMILARITY_DRAWS: usize = 32;

/// Seed used by [`find_similarity`] unless overridden by [`with_similarity_seed`].
pub const DEFAULT_SEED: u64 = 0x5EED_11F7;

thread_local! {
    static SEED: std::cell::Cell<u64> = const { std::cell::Cell::new(DEFAULT_SEED) };
}

/// Run `f` with every unseeded similarity search on this thread using `seed`.
pub fn with_similarity_seed<T>(seed: u64, f: impl FnOnce() -> T) -> T {
    let prev = SEED.with(|s| s.replace(seed));
    let out = f();
    SEED.with(|s| s.set(prev));
    out
}

pub(crate) fn current_seed() -> u64 {
    SEED.with(|s| s.get())
}

/// Row block of the operator `vec(Q) ↦ vec(QX - YQ)` (column-major vec).
fn sylvester_operator(x: &Matrix, y: &Matrix) -> Matrix {
    let d = x.nrows();
    let id = Matrix::identity(d, d);
    x.transpose().kronecker(&id) - id.kronecker(y)
}

fn unvec(v: &[f64], d: usize) -> Matrix {
    Matrix::from_column_slice(d, d, v)
}

/// Basis of `{Q : Q X_k = Y_k Q for every pair}`.
///
/// The kernel cutoff is `residual_tol` relative to the operator norm, so every
/// returned element satisfies the intertwining relation to the same accuracy
/// that [`find_similarity`] later certifies.
pub fn intertwiner_basis(pairs: &[(&Matrix, &Matrix)], tol: &ToleranceProfile) -> Result<Vec<Matrix>> {
    let d = pairs
        .first()
        .map(|(x, _)| x.nrows())
        .ok_or_else(|| LinflowError::Domain("no intertwining relation given".into()))?;
    for (x, y) in pairs {
        for m in [x, y] {
            if m.nrows() != d || m.ncols() != d {
                return Err(LinflowError::DimensionMismatch {
                    expected: d,
                    found: m.nrows(),
                });
            }
        }
    }
    let blocks: Vec<Matrix> = pairs.iter().map(|(x, y)| sylvester_operator(x, y)).collect();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut op = Matrix::zeros(rows, d * d);
    let mut off = 0;
    for b in &blocks {
        op.view_mut((off, 0), (b.nrows(), d * d)).copy_from(b);
        off += b.nrows();
    }
    let basis = if op.norm() == 0.0 {
        Matrix::identity(d * d, d * d)
    } else {
        kernel_basis(&op, tol.residual_tol)
    };
    Ok(basis.column_iter().map(|c| unvec(c.as_slice(), d)).collect())
}

/// Basis of `{Q : QA = BQ}`.
pub fn commutant_basis(a: &GeneratorMatrix, b: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<Vec<Matrix>> {
    check_dims(a, b)?;
    intertwiner_basis(&[(a.matrix(), b.matrix())], tol)
}

fn check_dims(a: &GeneratorMatrix, b: &GeneratorMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(LinflowError::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn accept(q: &Matrix, pairs: &[(&Matrix, &Matrix)], tol: &ToleranceProfile) -> bool {
    if inverse_condition(q) <= tol.rank_tol {
        return false;
    }
    let qn = spectral_norm(q);
    pairs.iter().all(|(x, y)| {
        let r = spectral_norm(&(q * *x - *y * q));
        r <= tol.residual_tol * (spectral_norm(x) + spectral_norm(y)).max(1.0) * qn
    })
}

/// Some invertible `Q` with `QA = BQ`, or `None` when `A` and `B` are not similar.
pub fn find_similarity(a: &GeneratorMatrix, b: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<Option<Matrix>> {
    find_similarity_seeded(a, b, tol, current_seed())
}

pub fn find_similarity_seeded(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: &ToleranceProfile,
    seed: u64,
) -> Result<Option<Matrix>> {
    check_dims(a, b)?;
    search(a, b, &[], tol, seed)
}

/// Like [`find_similarity_seeded`] but additionally requiring `Q X = X Q` for
/// each `X` in `commuting` (used for complex-linear similarity of realified
/// generators).
pub fn find_similarity_constrained(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    commuting: &[&Matrix],
    tol: &ToleranceProfile,
    seed: u64,
) -> Result<Option<Matrix>> {
    check_dims(a, b)?;
    search(a, b, commuting, tol, seed)
}

fn search(
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    commuting: &[&Matrix],
    tol: &ToleranceProfile,
    seed: u64,
) -> Result<Option<Matrix>> {
    let mut pairs: Vec<(&Matrix, &Matrix)> = vec![(a.matrix(), b.matrix())];
    pairs.extend(commuting.iter().map(|x| (*x, *x)));
    let d = a.dim();

    let id = Matrix::identity(d, d);
    if accept(&id, &pairs, tol) {
        return Ok(Some(id));
    }

    let basis = intertwiner_basis(&pairs, tol)?;
    if basis.len() < d {
        // the commutant of a d×d matrix has dimension at least d
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..SIMILARITY_DRAWS {
        let mut q = Matrix::zeros(d, d);
        for k in &basis {
            let c: f64 = StandardNormal.sample(&mut rng);
            q += k * c;
        }
        let n = spectral_norm(&q);
        if n == 0.0 {
            continue;
        }
        q /= n;
        if accept(&q, &pairs, tol) {
            return Ok(Some(q));
        }
    }

    if commuting.is_empty() && same_jordan_structure(a, b, tol)? {
        Err(LinflowError::NoInvertibleWitness {
            draws: SIMILARITY_DRAWS,
        })
    } else {
        Ok(None)
    }
}

/// Eigenvalue clusters with their Jordan block sizes, or `None` when a rank
/// chain is inconsistent.
pub(crate) fn jordan_signature(
    a: &GeneratorMatrix,
    tol: &ToleranceProfile,
) -> Result<Option<Vec<(Complex64, Vec<usize>)>>> {
    let spec = eigenvalues(a, tol)?;
    let mut out = Vec::new();
    for c in spec.clusters() {
        match block_sizes(a.matrix(), c.value, c.multiplicity, tol.rank_tol) {
            Some(s) => out.push((c.value, s)),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

fn same_jordan_structure(a: &GeneratorMatrix, b: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<bool> {
    let (Some(sa), Some(sb)) = (jordan_signature(a, tol)?, jordan_signature(b, tol)?) else {
        return Ok(false);
    };
    if sa.len() != sb.len() {
        return Ok(false);
    }
    let r = tol.eig_radius(a.norm().max(b.norm()));
    Ok(sa
        .iter()
        .all(|(z, s)| sb.iter().any(|(w, t)| (z - w).norm() <= r && s == t)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn commutant_dimensions() {
        let i2 = GeneratorMatrix::identity(2);
        assert_eq!(commutant_basis(&i2, &i2, &tol()).unwrap().len(), 4);

        let j2 = GeneratorMatrix::jordan_real(2, 0.0);
        let o2 = GeneratorMatrix::zeros(2);
        let k = commutant_basis(&j2, &o2, &tol()).unwrap();
        assert_eq!(k.len(), 2);
        // Q J_2 = 0 forces the second column of Q to vanish... and Q J_2 has
        // first column 0 with second column Q e_1, so Q e_1 = 0
        for q in &k {
            assert!(q.column(0).norm() < 1e-12);
        }

        let d = GeneratorMatrix::diag(&[1.0, 2.0]);
        let k = commutant_basis(&d, &d, &tol()).unwrap();
        assert_eq!(k.len(), 2);
        for q in &k {
            assert!(q[(0, 1)].abs() < 1e-12 && q[(1, 0)].abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let r = commutant_basis(&GeneratorMatrix::identity(2), &GeneratorMatrix::identity(3), &tol());
        assert!(matches!(r, Err(LinflowError::DimensionMismatch { .. })));
    }

    #[test]
    fn similarity_examples() {
        let j = GeneratorMatrix::jordan_real(2, 1.0);
        assert_eq!(find_similarity(&j, &j, &tol()).unwrap(), Some(Matrix::identity(2, 2)));

        let j0 = GeneratorMatrix::jordan_real(2, 0.0);
        let o2 = GeneratorMatrix::zeros(2);
        assert_eq!(find_similarity(&j0, &o2, &tol()).unwrap(), None);

        let a = GeneratorMatrix::diag(&[2.0, 1.0]);
        let b = GeneratorMatrix::diag(&[1.0, 2.0]);
        let q = find_similarity(&a, &b, &tol()).unwrap().unwrap();
        assert!((&q * a.matrix() - b.matrix() * &q).norm() < 1e-12);
        // only anti-diagonal matrices intertwine here
        assert!(q[(0, 0)].abs() < 1e-12 && q[(1, 1)].abs() < 1e-12);
    }

    #[test]
    fn similarity_under_random_conjugation() {
        let a = GeneratorMatrix::block_diag(&[
            GeneratorMatrix::jordan_real(2, -1.0),
            GeneratorMatrix::jordan_complex(1, 0.0, 2.0),
        ]);
        let p = Matrix::from_row_slice(
            4,
            4,
            &[
                2.0, 0.1, 0.0, 1.0, 0.3, 1.0, -1.0, 0.0, 0.0, 0.5, 1.5, 0.2, 1.0, 0.0, 0.0, 1.0,
            ],
        );
        let b = a.conjugated(&p).unwrap();
        let q = find_similarity(&a, &b, &tol()).unwrap().unwrap();
        let r = (&q * a.matrix() - b.matrix() * &q).norm();
        assert!(r < 1e-8 * (a.norm() + b.norm()));
    }

    #[test]
    fn complex_linear_constraint_separates_conjugates() {
        // [1+i] and [1-i] realified: similar over R, not complex-linearly
        let a = GeneratorMatrix::from_rows(&[&[1.0, -1.0], &[1.0, 1.0]]);
        let b = GeneratorMatrix::from_rows(&[&[1.0, 1.0], &[-1.0, 1.0]]);
        let j = Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(find_similarity(&a, &b, &tol()).unwrap().is_some());
        assert!(find_similarity_constrained(&a, &b, &[&j], &tol(), 1).unwrap().is_none());
    }
}
