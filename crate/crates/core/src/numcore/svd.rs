//! Full singular value decompositions, delegated to faer.
//!
//! nalgebra's SVD returns wrong factors for some rank-deficient inputs (a
//! 4×2 rank-one matrix reconstructs with error 1e-1), so every rank and
//! kernel decision goes through here.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

pub(crate) struct Svd<T> {
    /// Singular values, descending; `min(r, c)` of them.
    pub s: Vec<f64>,
    /// `r × r`, columns matching `s` first.
    pub u: DMatrix<T>,
    /// `c × c`, columns matching `s` first.
    pub v: DMatrix<T>,
}

pub(crate) trait Scalar: ComplexField<RealField = f64> + Copy {
    fn svd(m: &DMatrix<Self>) -> Svd<Self>;
}

macro_rules! faer_svd {
    ($t:ty, $re:expr) => {
        impl Scalar for $t {
            fn svd(m: &DMatrix<$t>) -> Svd<$t> {
                let (r, c) = m.shape();
                if r == 0 || c == 0 {
                    return Svd {
                        s: Vec::new(),
                        u: DMatrix::identity(r, r),
                        v: DMatrix::identity(c, c),
                    };
                }
                let f = faer::Mat::<$t>::from_fn(r, c, |i, j| m[(i, j)]);
                let svd = f.svd().expect("SVD of a finite matrix converges");
                let (fu, fv, fs) = (svd.U(), svd.V(), svd.S().column_vector());
                let mut s: Vec<f64> = (0..r.min(c)).map(|k| $re(fs[k])).collect();
                let mut order: Vec<usize> = (0..s.len()).collect();
                order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
                let perm = |n: usize| -> Vec<usize> { order.iter().cloned().chain(order.len()..n).collect() };
                let (pu, pv) = (perm(r), perm(c));
                s = order.iter().map(|&k| s[k]).collect();
                Svd {
                    s,
                    u: DMatrix::from_fn(r, r, |i, j| fu[(i, pu[j])]),
                    v: DMatrix::from_fn(c, c, |i, j| fv[(i, pv[j])]),
                }
            }
        }
    };
}

faer_svd!(f64, |x: f64| x);
faer_svd!(Complex64, |x: Complex64| x.re);

/// Count of singular values above `rank_tol · max(σ_max, scale)`.
pub(crate) fn rank_against(sv: &[f64], rank_tol: f64, scale: f64) -> usize {
    let reference = sv.first().cloned().unwrap_or(0.0).max(scale);
    if reference == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rank_tol * reference).count()
}

/// Orthonormal kernel basis of `m`, rank judged by [`rank_against`].
pub(crate) fn kernel<T: Scalar>(m: &DMatrix<T>, rank_tol: f64, scale: f64) -> DMatrix<T> {
    let c = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(c, c);
    }
    let svd = T::svd(m);
    let rank = rank_against(&svd.s, rank_tol, scale);
    svd.v.columns(rank, c - rank).into_owned()
}

/// Orthonormal basis of the column span.
pub(crate) fn range<T: Scalar>(m: &DMatrix<T>, rank_tol: f64) -> DMatrix<T> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let svd = T::svd(m);
    let rank = rank_against(&svd.s, rank_tol, 0.0);
    svd.u.columns(0, rank).into_owned()
}

/// Leading `count` left singular vectors and the smallest of their singular values.
pub(crate) fn top_directions<T: Scalar>(m: &DMatrix<T>, count: usize) -> (DMatrix<T>, f64) {
    let svd = T::svd(m);
    let weakest = if count == 0 {
        f64::INFINITY
    } else {
        svd.s.get(count - 1).cloned().unwrap_or(0.0)
    };
    (svd.u.columns(0, count.min(m.nrows())).into_owned(), weakest)
}

pub(crate) fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    f64::svd(m).s
}
