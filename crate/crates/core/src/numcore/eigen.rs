//! Eigenvalues by balancing, Householder reduction to Hessenberg form and
//! the shifted double-step QR iteration, followed by clustering and
//! conjugate-pair snapping so that downstream code sees exact structure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::structure::block_sizes;
use crate::error::{LinflowError, Result};
use crate::matrix::{GeneratorMatrix, Matrix};
use crate::tolerance::ToleranceProfile;

const MAX_QR_ITERATIONS: usize = 60;

/// Eigenvalues with algebraic multiplicity.
///
/// Entries are sorted by real part, then imaginary part. Equal values are
/// bitwise identical after clustering, so `clusters` can group them exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// `true` where the entry is one half of a non-real conjugate pair.
    pub paired: Vec<bool>,
}

/// One distinct eigenvalue (imaginary part ≥ 0) and the number of times it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

impl EigenCluster {
    pub fn is_real(&self) -> bool {
        self.value.im == 0.0
    }

    /// Dimension of the generalized eigenspace in the real picture.
    pub fn real_dim(&self) -> usize {
        if self.is_real() {
            self.multiplicity
        } else {
            2 * self.multiplicity
        }
    }
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Distinct eigenvalues in the closed upper half-plane with multiplicities.
    pub fn clusters(&self) -> Vec<EigenCluster> {
        let mut out: Vec<EigenCluster> = Vec::new();
        for z in self.eigenvalues.iter().filter(|z| z.im >= 0.0) {
            match out.iter_mut().find(|c| c.value == *z) {
                Some(c) => c.multiplicity += 1,
                None => out.push(EigenCluster {
                    value: *z,
                    multiplicity: 1,
                }),
            }
        }
        out
    }

    /// Eigenvalues with zero (snapped) real part.
    pub fn imaginary_axis(&self) -> Vec<Complex64> {
        self.eigenvalues.iter().filter(|z| z.re == 0.0).cloned().collect()
    }

    fn from_values(mut values: Vec<Complex64>) -> Self {
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let paired = values.iter().map(|z| z.im != 0.0).collect();
        Spectrum {
            eigenvalues: values,
            paired,
        }
    }
}

/// Clustered, conjugate-symmetric spectrum of `a`.
pub fn eigenvalues(a: &GeneratorMatrix, tol: &ToleranceProfile) -> Result<Spectrum> {
    let raw = raw_eigenvalues(a.matrix())?;
    Ok(cluster_spectrum(a.matrix(), raw, tol))
}

/// Unprocessed eigenvalues: closed form for d ≤ 2, QR iteration otherwise.
pub fn raw_eigenvalues(a: &Matrix) -> Result<Vec<Complex64>> {
    match a.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![Complex64::new(a[(0, 0)], 0.0)]),
        2 => Ok(closed_form_2x2(a).to_vec()),
        _ => {
            let mut h = a.clone();
            balance(&mut h);
            hessenberg(&mut h);
            hqr(&mut h)
        }
    }
}

fn closed_form_2x2(a: &Matrix) -> [Complex64; 2] {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let half_tr = 0.5 * (p + s);
    // discriminant of the characteristic polynomial, written to avoid cancellation
    let half_diff = 0.5 * (p - s);
    let disc = half_diff * half_diff + q * r;
    if disc >= 0.0 {
        let root = disc.sqrt();
        let big = if half_tr >= 0.0 { half_tr + root } else { half_tr - root };
        let det = p * s - q * r;
        let small = if big != 0.0 { det / big } else { half_tr - root };
        [Complex64::new(big, 0.0), Complex64::new(small, 0.0)]
    } else {
        let root = (-disc).sqrt();
        [Complex64::new(half_tr, root), Complex64::new(half_tr, -root)]
    }
}

/// Diagonal similarity scaling by powers of two to equalize row and column norms.
fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(a: &mut Matrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // A <- H A
        for j in 0..n {
            let dot: f64 = (0..v.len()).map(|i| v[i] * a[(k + 1 + i, j)]).sum();
            for i in 0..v.len() {
                a[(k + 1 + i, j)] -= 2.0 * v[i] * dot;
            }
        }
        // A <- A H
        for i in 0..n {
            let dot: f64 = (0..v.len()).map(|j| a[(i, k + 1 + j)] * v[j]).sum();
            for j in 0..v.len() {
                a[(i, k + 1 + j)] -= 2.0 * dot * v[j];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Eigenvalues of an upper Hessenberg matrix by the double-shift QR iteration.
fn hqr(a: &mut Matrix) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if its == MAX_QR_ITERATIONS {
                return Err(LinflowError::numerical(
                    "eigenvalues",
                    format!("QR iteration did not converge for a {n}x{n} matrix"),
                ));
            }
            if its == 10 || its == 20 || its == 40 {
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            let mut k = m;
            while k < nu {
                let mut xk = 0.0;
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = 0.0;
                    if k != nu - 1 {
                        r = a[(k + 2, k - 1)];
                    }
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * xk;
                    }
                    p += s;
                    let xx = p / s;
                    let yy = q / s;
                    let zz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k != nu - 1 {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * zz;
                        }
                        a[(k + 1, j)] -= pp * yy;
                        a[(k, j)] -= pp * xx;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = xx * a[(i, k)] + yy * a[(i, k + 1)];
                        if k != nu - 1 {
                            pp += zz * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    let out: Vec<Complex64> = (0..n).map(|i| Complex64::new(wr[i], wi[i])).collect();
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LinflowError::numerical(
            "eigenvalues",
            "QR iteration produced a non-finite value",
        ));
    }
    Ok(out)
}

/// Union-find over indices linked when `linked(i, j)` holds.
fn components(n: usize, linked: impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut c = i;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for i in 0..n {
        for j in i + 1..n {
            if linked(i, j) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    groups
}

/// Cluster raw eigenvalues, snap conjugate pairs and near-zero parts, then try
/// to merge nearby clusters whose union is a consistent defective eigenvalue.
pub(crate) fn cluster_spectrum(a: &Matrix, raw: Vec<Complex64>, tol: &ToleranceProfile) -> Spectrum {
    let norm = crate::matrix::spectral_norm(a);
    let radius = tol.eig_radius(norm);

    let snapped: Vec<Complex64> = raw
        .iter()
        .map(|z| Complex64::new(z.re, if z.im.abs() < radius { 0.0 } else { z.im }))
        .collect();

    let groups = components(snapped.len(), |i, j| (snapped[i] - snapped[j]).norm() <= radius);
    let mut clusters: Vec<(Complex64, usize)> = groups
        .iter()
        .map(|g| {
            let mean = g.iter().map(|&i| snapped[i]).sum::<Complex64>() / g.len() as f64;
            (mean, g.len())
        })
        .collect();

    // conjugate-pair snapping
    let mut upper: Vec<(Complex64, usize)> = Vec::new();
    let mut lower: Vec<(Complex64, usize)> = Vec::new();
    let mut real: Vec<(f64, usize)> = Vec::new();
    for (z, k) in clusters.drain(..) {
        if z.im.abs() < radius {
            real.push((z.re, k));
        } else if z.im > 0.0 {
            upper.push((z, k));
        } else {
            lower.push((z, k));
        }
    }
    let mut pairs: Vec<(Complex64, usize)> = Vec::new();
    for (z, k) in upper {
        let partner = lower
            .iter()
            .enumerate()
            .filter(|(_, (w, m))| *m == k && (z - w.conj()).norm() <= radius * 4.0)
            .min_by(|(_, (w1, _)), (_, (w2, _))| (z - w1.conj()).norm().total_cmp(&(z - w2.conj()).norm()))
            .map(|(i, _)| i);
        match partner {
            Some(i) => {
                let (w, _) = lower.remove(i);
                let avg = Complex64::new(0.5 * (z.re + w.re), 0.5 * (z.im - w.im));
                pairs.push((avg, k));
            }
            None => pairs.push((z, k)),
        }
    }
    // unmatched lower entries cannot occur for real input; fold them back in mirrored
    for (w, k) in lower {
        pairs.push((w.conj(), k));
    }

    let snap_re = |x: f64| if x.abs() < radius { 0.0 } else { x };
    let mut nodes: Vec<(Complex64, usize)> = real
        .into_iter()
        .map(|(x, k)| (Complex64::new(snap_re(x), 0.0), k))
        .chain(pairs.into_iter().map(|(z, k)| (Complex64::new(snap_re(z.re), z.im), k)))
        .collect();

    merge_defective(a, &mut nodes, tol, norm);

    let mut values = Vec::with_capacity(a.nrows());
    for (z, k) in nodes {
        for _ in 0..k {
            values.push(z);
            if z.im != 0.0 {
                values.push(z.conj());
            }
        }
    }
    Spectrum::from_values(values)
}

/// Merge groups of nearby clusters (including a complex cluster with its own
/// mirror image) when the rank chain confirms a single defective eigenvalue.
fn merge_defective(a: &Matrix, nodes: &mut Vec<(Complex64, usize)>, tol: &ToleranceProfile, norm: f64) {
    let wide = tol.defect_radius(norm);
    let radius = tol.eig_radius(norm);
    let snapshot = nodes.clone();
    let near_axis = |z: Complex64| z.im != 0.0 && 2.0 * z.im <= wide;
    let groups = components(snapshot.len(), |i, j| (snapshot[i].0 - snapshot[j].0).norm() <= wide);
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for g in groups {
        let single = g.len() == 1;
        let collapses = g.iter().any(|&i| snapshot[i].0.im == 0.0 || near_axis(snapshot[i].0));
        if single && !near_axis(snapshot[g[0]].0) {
            out.push(snapshot[g[0]]);
            continue;
        }
        let candidate = if collapses {
            // everything folds onto the real axis: count each pair twice
            let mut sum = 0.0;
            let mut count = 0usize;
            for &i in &g {
                let (z, k) = snapshot[i];
                let w = if z.im == 0.0 { k } else { 2 * k };
                sum += z.re * w as f64;
                count += w;
            }
            let c = sum / count as f64;
            (Complex64::new(if c.abs() < radius { 0.0 } else { c }, 0.0), count)
        } else {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut count = 0usize;
            for &i in &g {
                let (z, k) = snapshot[i];
                sum += z * k as f64;
                count += k;
            }
            let c = sum / count as f64;
            (
                Complex64::new(if c.re.abs() < radius { 0.0 } else { c.re }, c.im),
                count,
            )
        };
        if block_sizes(a, candidate.0, candidate.1, tol.rank_tol).is_some() {
            out.push(candidate);
        } else {
            out.extend(g.iter().map(|&i| snapshot[i]));
        }
    }
    *nodes = out;
}
