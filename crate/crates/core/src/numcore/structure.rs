//! Jordan block sizes from rank chains.

use num_complex::Complex64;

use super::linalg::{mat_pow, numerical_rank_scaled};
use crate::matrix::Matrix;

/// `A - zI` for real `z`, or the real quadratic `A² - 2 Re z A + |z|² I` otherwise.
pub(crate) fn shifted(a: &Matrix, z: Complex64) -> Matrix {
    let d = a.nrows();
    let id = Matrix::identity(d, d);
    if z.im == 0.0 {
        a - &id * z.re
    } else {
        a * a - a * (2.0 * z.re) + &id * z.norm_sqr()
    }
}

/// Sizes (descending) of the Jordan blocks at `z` (upper half-plane or real)
/// whose algebraic multiplicity is `multiplicity`, or `None` when the rank chain
/// is inconsistent with that multiplicity at the given tolerance.
pub(crate) fn block_sizes(a: &Matrix, z: Complex64, multiplicity: usize, rank_tol: f64) -> Option<Vec<usize>> {
    let d = a.nrows();
    let m = shifted(a, z);
    let weight = if z.im == 0.0 { 1 } else { 2 };
    // ranks are judged against the unshifted scale: the shifted matrix can be
    // round-off sized, e.g. the quadratic of a 2×2 with complex spectrum
    let base = (a.norm() + z.norm()).powi(weight as i32);
    let mut ranks = vec![d];
    for n in 1..=multiplicity {
        let r = numerical_rank_scaled(&mat_pow(&m, n), rank_tol, base.powi(n as i32));
        ranks.push(r);
    }
    if d - ranks[multiplicity] != weight * multiplicity {
        return None;
    }
    // at_least[n] = number of blocks of size >= n
    let mut at_least = vec![0usize; multiplicity + 2];
    for n in 1..=multiplicity {
        if ranks[n] > ranks[n - 1] {
            return None;
        }
        let g = ranks[n - 1] - ranks[n];
        if g % weight != 0 {
            return None;
        }
        at_least[n] = g / weight;
    }
    let mut sizes = Vec::new();
    for n in (1..=multiplicity).rev() {
        if at_least[n] < at_least[n + 1] {
            return None;
        }
        for _ in 0..(at_least[n] - at_least[n + 1]) {
            sizes.push(n);
        }
    }
    let total: usize = sizes.iter().sum();
    if total != multiplicity {
        return None;
    }
    Some(sizes)
}
