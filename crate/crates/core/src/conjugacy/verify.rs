use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::map::ConjugacyMap;
use crate::error::{LinflowError, Result};
use crate::floweval::LinearFlow;
use crate::matrix::GeneratorMatrix;
use crate::tolerance::ToleranceProfile;

pub const DEFAULT_SAMPLE_SEED: u64 = 0x4A17_0D05;

/// Times and points at which a conjugacy relation is checked.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub times: Vec<f64>,
    pub points: Vec<DVector<f64>>,
}

fn first_primes(n: usize) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::with_capacity(n);
    let mut k = 2;
    while out.len() < n {
        if out.iter().take_while(|p| *p * *p <= k).all(|p| k % p != 0) {
            out.push(k);
        }
        k += 1;
    }
    out
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

impl SampleSpec {
    /// `n_times` equispaced times in `[t0, t1]` and `n_points` Halton points in
    /// the ball of the given radius; the seed selects the start of the sequence.
    pub fn grid(dim: usize, n_times: usize, (t0, t1): (f64, f64), n_points: usize, radius: f64, seed: u64) -> Self {
        let times = if n_times == 1 {
            vec![t0]
        } else {
            (0..n_times)
                .map(|k| t0 + (t1 - t0) * k as f64 / (n_times - 1) as f64)
                .collect()
        };
        let primes = first_primes(dim);
        let mut points = Vec::with_capacity(n_points);
        let mut i = 1 + seed % 4099;
        while points.len() < n_points {
            let u = DVector::from_fn(dim, |k, _| 2.0 * radical_inverse(i, primes[k]) - 1.0);
            i += 1;
            let x = if dim <= 6 {
                // rejection keeps the points uniform in the ball
                if u.norm() > 1.0 {
                    continue;
                }
                u
            } else {
                u / (dim as f64).sqrt()
            };
            points.push(x * radius);
        }
        SampleSpec { times, points }
    }

    /// 33 times in `[−3, 3]`, 100 points in the unit ball.
    pub fn default_grid(dim: usize) -> Self {
        Self::grid(dim, 33, (-3.0, 3.0), 100, 1.0, DEFAULT_SAMPLE_SEED)
    }
}

/// `sup ‖h(e^{tA}x) − e^{αtB}h(x)‖ / (1 + ‖h(e^{tA}x)‖)` over the samples.
pub fn verify_relation(
    h: &ConjugacyMap,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    alpha: f64,
    samples: &SampleSpec,
) -> Result<f64> {
    for d in [a.dim(), b.dim()] {
        if d != h.dim_in() {
            return Err(LinflowError::DimensionMismatch {
                expected: h.dim_in(),
                found: d,
            });
        }
    }
    let tol = ToleranceProfile::default();
    let (fa, fb) = (LinearFlow::new(a, &tol), LinearFlow::new(b, &tol));
    let hx: Vec<DVector<f64>> = samples.points.iter().map(|x| h.apply(x)).collect();
    let mut worst: f64 = 0.0;
    for &t in &samples.times {
        let (ea, eb) = (fa.matrix(t)?, fb.matrix(alpha * t)?);
        for (x, hx) in samples.points.iter().zip(&hx) {
            let lhs = h.apply(&(&ea * x));
            let r = (&lhs - &eb * hx).norm() / (1.0 + lhs.norm());
            worst = worst.max(if r.is_nan() { f64::INFINITY } else { r });
        }
    }
    Ok(worst)
}

/// Pair sampling for [`estimate_holder_exponent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderSampling {
    pub pairs: usize,
    /// Scales are drawn log-uniformly from `radius·10^{−decades}` to `radius`.
    pub decades: f64,
    pub seed: u64,
}

impl Default for HolderSampling {
    fn default() -> Self {
        HolderSampling {
            pairs: 400,
            decades: 8.0,
            seed: DEFAULT_SAMPLE_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    /// Smaller of the fitted slopes for `h` and `h⁻¹`.
    pub beta: f64,
    /// `C` in `‖h(x) − h(y)‖ ≈ C‖x − y‖^β` for the limiting direction.
    pub constant: f64,
    /// 95% interval for `beta` from the regression's standard error.
    pub interval: (f64, f64),
    pub forward_slope: f64,
    pub inverse_slope: f64,
}

struct Fit {
    slope: f64,
    intercept: f64,
    stderr: f64,
}

fn fit(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    let n = xs.len() as f64;
    if xs.len() < 3 {
        return Err(LinflowError::DegenerateSamples("fewer than three usable pairs".into()));
    }
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-12 * n {
        return Err(LinflowError::DegenerateSamples(
            "pair distances do not spread over scales".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    Ok(Fit {
        slope,
        intercept,
        stderr,
    })
}

/// Regression of `log‖h(x) − h(y)‖` on `log‖x − y‖` over pairs in `B_radius(0)`,
/// for `h` and for `h⁻¹`.
///
/// Pairs are `(x, c·x)` with `c ∈ [0, 1/2]`, so every pair reaches down to the
/// origin where the regularity of the maps built here is weakest.
pub fn estimate_holder_exponent(h: &ConjugacyMap, radius: f64, samples: &HolderSampling) -> Result<HolderEstimate> {
    if !(radius > 0.0 && radius.is_finite()) || samples.decades <= 0.0 {
        return Err(LinflowError::DegenerateSamples(
            "radius and decades must be positive".into(),
        ));
    }
    let d = h.dim_in();
    let mut rng = ChaCha8Rng::seed_from_u64(samples.seed);
    let mut pairs = Vec::with_capacity(samples.pairs);
    for _ in 0..samples.pairs {
        let dir = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = dir.norm();
        if n == 0.0 {
            continue;
        }
        let s = radius * 10f64.powf(-samples.decades * rng.random::<f64>());
        let x = dir * (s / n);
        let c: f64 = 0.5 * rng.random::<f64>();
        let y = &x * c;
        pairs.push((x, y));
    }
    let slope_of = |inverse: bool| -> Result<Fit> {
        let (mut xs, mut ys) = (vec![], vec![]);
        for (x, y) in &pairs {
            let (p, q) = if inverse {
                // sample pairs in the image so both directions see the same scales
                (h.apply_inverse(x), h.apply_inverse(y))
            } else {
                (h.apply(x), h.apply(y))
            };
            let (dx, dy) = ((x - y).norm(), (p - q).norm());
            if dx > 0.0 && dy > 0.0 && dy.is_finite() {
                xs.push(dx.ln());
                ys.push(dy.ln());
            }
        }
        fit(&xs, &ys)
    };
    let (fw, bw) = (slope_of(false)?, slope_of(true)?);
    let best = if fw.slope <= bw.slope { &fw } else { &bw };
    let half = 1.96 * best.stderr;
    Ok(HolderEstimate {
        beta: best.slope,
        constant: best.intercept.exp(),
        interval: (best.slope - half, best.slope + half),
        forward_slope: fw.slope,
        inverse_slope: bw.slope,
    })
}
