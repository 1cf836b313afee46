//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p linflow --test acceptance -- --nocapture` to see
//! the report. Derived quantities are cross-checked against a Taylor-series
//! exponential written here, independent of the library's flow evaluation.

use std::f64::consts::{SQRT_2, TAU};
use std::time::{Duration, Instant};

use linflow::conjugacy::{
    build_block_to_diag, build_unwind, estimate_holder_exponent, power_map, verify_relation, ConjugacyMap,
    HolderSampling, SampleSpec,
};
use linflow::equivalence::{
    canon2, cross_ratio, decide_beta, decide_holder, decide_lipschitz, decide_smooth, decide_topological, BetaSide,
    EquivalenceLevel,
};
use linflow::floweval::{exp_oracle, flow_map, imaginary_spectrum, minimal_period, PeriodValue};
use linflow::flowstruct::{realify, scu_split};
use linflow::{CMatrix, GeneratorMatrix, Matrix, ToleranceProfile};
use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x5EED_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn tol() -> ToleranceProfile {
    ToleranceProfile::default()
}

// ---------- independent oracle ----------

/// `e^M` by scaling and squaring of a 30-term Taylor series.
fn taylor_exp(m: &Matrix) -> Matrix {
    let d = m.nrows();
    let norm = m.iter().map(|x| x.abs()).sum::<f64>().max(1e-300);
    let s = (norm.log2().ceil() + 1.0).max(0.0) as i32;
    let a = m / 2f64.powi(s);
    let mut term = Matrix::identity(d, d);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &a / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

fn oracle_residual(h: &ConjugacyMap, a: &GeneratorMatrix, b: &GeneratorMatrix, alpha: f64, s: &SampleSpec) -> f64 {
    let mut worst: f64 = 0.0;
    for &t in &s.times {
        let (ea, eb) = (taylor_exp(&(a.matrix() * t)), taylor_exp(&(b.matrix() * (alpha * t))));
        for x in &s.points {
            let lhs = h.apply(&(&ea * x));
            worst = worst.max((&lhs - &eb * h.apply(x)).norm() / (1.0 + lhs.norm()));
        }
    }
    worst
}

/// Integer matrix with determinant ±1, so that `Q` and `Q⁻¹` are exact.
fn unimodular(d: usize, rng: &mut ChaCha8Rng) -> (Matrix, Matrix) {
    let mut q = Matrix::identity(d, d);
    let mut qi = Matrix::identity(d, d);
    if d == 1 {
        return (q, qi);
    }
    for _ in 0..3 {
        let i = rng.random_range(0..d);
        let mut j = rng.random_range(0..d - 1);
        if j >= i {
            j += 1;
        }
        let c = rng.random_range(-2i32..=2) as f64;
        let mut e = Matrix::identity(d, d);
        e[(i, j)] = c;
        let mut ei = Matrix::identity(d, d);
        ei[(i, j)] = -c;
        q = e * q;
        qi *= ei;
    }
    (q, qi)
}

fn conjugate(a: &Matrix, rng: &mut ChaCha8Rng) -> GeneratorMatrix {
    let (q, qi) = unimodular(a.nrows(), rng);
    GeneratorMatrix::new(&q * a * &qi).unwrap()
}

/// Block diagonal of random small Jordan blocks with half-integer data.
fn structured(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let mut m = Matrix::zeros(d, d);
    let mut k = 0;
    while k < d {
        let half = |rng: &mut ChaCha8Rng| rng.random_range(-4i32..=4) as f64 / 2.0;
        match rng.random_range(0..3) {
            0 if d - k >= 2 => {
                let (a, b) = (half(rng), rng.random_range(1i32..=3) as f64);
                m[(k, k)] = a;
                m[(k + 1, k + 1)] = a;
                m[(k, k + 1)] = -b;
                m[(k + 1, k)] = b;
                k += 2;
            }
            1 if d - k >= 2 => {
                let a = half(rng);
                m[(k, k)] = a;
                m[(k + 1, k + 1)] = a;
                m[(k, k + 1)] = 1.0;
                k += 2;
            }
            _ => {
                m[(k, k)] = half(rng);
                k += 1;
            }
        }
    }
    m
}

fn gaussian(d: usize, rng: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

// ---------- criteria ----------

fn c1_block_to_diag() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for m in 1..=4 {
        for a in [-2.0, -1.0, 1.0, 3.0] {
            let h = build_block_to_diag(m, a).unwrap();
            let (fa, fb) = (GeneratorMatrix::diag(&vec![a; m]), GeneratorMatrix::jordan_real(m, a));
            let s = SampleSpec::default_grid(m);
            worst = worst.max(verify_relation(&h, &fa, &fb, 1.0, &s).unwrap());
            worst_oracle = worst_oracle.max(oracle_residual(&h, &fa, &fb, 1.0, &s));
        }
    }
    let el = start.elapsed();
    outcome(
        worst < 1e-8 && worst_oracle < 1e-8 && el < Duration::from_secs(5),
        format!("max residual {worst:.2e} (oracle {worst_oracle:.2e}) over 16 pairs in {el:.2?}"),
    )
}

fn c2_unwind() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let mut round: f64 = 0.0;
    let ball = SampleSpec::grid(2, 1, (0.0, 0.0), 400, 2.0, SEED);
    for a in [-2.0, -1.0, 1.0, 2.0] {
        for b in [-2.0, -1.0, 1.0, 2.0] {
            let g = build_unwind(a, b).unwrap();
            let (fa, fb) = (GeneratorMatrix::jordan_complex(1, a, b), GeneratorMatrix::diag(&[a, a]));
            let s = SampleSpec::default_grid(2);
            worst = worst.max(verify_relation(&g, &fa, &fb, 1.0, &s).unwrap());
            worst_oracle = worst_oracle.max(oracle_residual(&g, &fa, &fb, 1.0, &s));
            for x in &ball.points {
                round = round.max((g.apply_inverse(&g.apply(x)) - x).norm());
                round = round.max((g.apply(&g.apply_inverse(x)) - x).norm());
            }
        }
    }
    outcome(
        worst < 1e-10 && worst_oracle < 1e-10 && round < 1e-12,
        format!("max residual {worst:.2e} (oracle {worst_oracle:.2e}), round trip {round:.2e}"),
    )
}

fn c3_cross_ratio() -> Outcome {
    let a = GeneratorMatrix::diag(&[1.0, 1.0, 2.0, 2.0, 4.0]);
    let b = GeneratorMatrix::diag(&[1.0; 5]);
    let t = tol();
    let rho = cross_ratio(&scu_split(&a, &t).unwrap(), &scu_split(&b, &t).unwrap())
        .unwrap()
        .rho;
    let at = |beta| decide_beta(&a, &b, beta, BetaSide::Minus, &t).unwrap();
    let (v5, v6) = (at(0.5), at(0.6));
    outcome(
        (rho - 0.25).abs() <= 1e-12 && v5.equivalent && v5.conclusive && !v6.equivalent && v6.conclusive,
        format!(
            "rho = {rho}, beta-minus at 0.5: {}, at 0.6: {}",
            v5.equivalent, v6.equivalent
        ),
    )
}

fn representatives() -> Vec<(&'static str, GeneratorMatrix)> {
    vec![
        ("O2", GeneratorMatrix::zeros(2)),
        ("J2", GeneratorMatrix::jordan_real(2, 0.0)),
        ("J1(i)", GeneratorMatrix::jordan_complex(1, 0.0, 1.0)),
        ("I2", GeneratorMatrix::identity(2)),
        ("diag[-1,1]", GeneratorMatrix::diag(&[-1.0, 1.0])),
        ("diag[0,1]", GeneratorMatrix::diag(&[0.0, 1.0])),
    ]
}

fn c4_catalog() -> Outcome {
    let start = Instant::now();
    let t = tol();
    let reps = representatives();
    let mut negatives = 0;
    for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            negatives += usize::from(!decide_topological(&reps[i].1, &reps[j].1, &t).unwrap().equivalent);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut unique, mut agree) = (0, 0);
    let mut seen = std::collections::BTreeSet::new();
    for k in 0..1000 {
        let a = if k % 2 == 0 {
            GeneratorMatrix::new(gaussian(2, &mut rng)).unwrap()
        } else {
            conjugate(&structured(2, &mut rng), &mut rng)
        };
        let hits: Vec<&str> = reps
            .iter()
            .filter(|(_, r)| decide_topological(&a, r, &t).unwrap().equivalent)
            .map(|(l, _)| *l)
            .collect();
        let label = canon2(&a, EquivalenceLevel::Topological, &t).unwrap().label;
        if hits.len() == 1 {
            unique += 1;
            if hits[0] == label {
                agree += 1;
                seen.insert(label);
            }
        }
    }
    let el = start.elapsed();
    outcome(
        negatives == 15 && unique == 1000 && agree == 1000 && el < Duration::from_secs(30),
        format!(
            "{negatives}/15 representative pairs inequivalent; {unique}/1000 unique matches, {agree}/1000 agree with canon2 ({} classes hit) in {el:.2?}",
            seen.len()
        ),
    )
}

fn c5_witnesses() -> Outcome {
    let t = tol();
    let g = |rows: &[&[f64]]| GeneratorMatrix::from_rows(rows);
    let mut lines = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, cond: bool| {
        ok &= cond;
        if !cond {
            lines.push(name.to_string());
        }
    };

    let (a, b) = (GeneratorMatrix::diag(&[-1.0, 1.0]), GeneratorMatrix::diag(&[-0.5, 1.0]));
    check(
        "saddles topological",
        decide_topological(&a, &b, &t).unwrap().equivalent,
    );
    check("saddles not holder", !decide_holder(&a, &b, &t).unwrap().equivalent);

    let (a, b) = (
        GeneratorMatrix::jordan_real(2, 1.0),
        GeneratorMatrix::jordan_complex(1, 1.0, 1.0),
    );
    let v = decide_holder(&a, &b, &t).unwrap();
    check("J2(1) ~ J1(1+i) holder alpha 1", v.equivalent && v.alpha == Some(1.0));

    let (a, b) = (GeneratorMatrix::jordan_real(2, 1.0), g(&[&[1.0, 0.0], &[0.0, 1.0]]));
    check("J2(1) ~ I holder", decide_holder(&a, &b, &t).unwrap().equivalent);
    check("J2(1) !~ I smooth", !decide_smooth(&a, &b, &t).unwrap().equivalent);
    check(
        "J2(1) !~ I lipschitz",
        !decide_lipschitz(&a, &b, &t).unwrap().equivalent,
    );

    let one = |z: Complex64| realify(&CMatrix::from_element(1, 1, z)).unwrap();
    let (a, b) = (one(Complex64::new(1.0, 1.0)), one(Complex64::new(1.0, -1.0)));
    check("[1+i] ~ [1-i] holder", decide_holder(&a, &b, &t).unwrap().equivalent);
    check("[1+i] !~ [1-i] smooth", !decide_smooth(&a, &b, &t).unwrap().equivalent);

    let detail = if lines.is_empty() {
        "all 8 verdicts as expected".into()
    } else {
        format!("failed: {}", lines.join("; "))
    };
    outcome(ok, detail)
}

fn c6_exponential() -> Outcome {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut worst: f64 = 0.0;
    let mut worst_taylor: f64 = 0.0;
    for k in 0..200 {
        let d = 1 + k % 6;
        let m = if k % 4 == 3 {
            structured(d, &mut rng)
        } else {
            gaussian(d, &mut rng)
        };
        let a = GeneratorMatrix::new(m).unwrap();
        let time = rng.random_range(-1.0..1.0) * 10.0 / a.norm().max(1e-12);
        let reference = exp_oracle(&a, time).unwrap();
        let x = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
        let y = flow_map(&a, time, &x, &t).unwrap();
        let ex = &reference * &x;
        worst = worst.max((&y - &ex).norm() / ex.norm());
        let tay = taylor_exp(&(a.matrix() * time));
        worst_taylor = worst_taylor.max((&tay - &reference).norm() / reference.norm());
    }
    outcome(
        worst < 1e-10,
        format!("max relative deviation {worst:.2e} over 200 matrices (oracle vs Taylor {worst_taylor:.2e})"),
    )
}

fn c7_period() -> Outcome {
    let t = tol();
    let rot = |b: f64| GeneratorMatrix::jordan_complex(1, 0.0, b);
    let a = GeneratorMatrix::block_diag(&[rot(2.0), rot(2.0), rot(3.0)]);
    let x = DVector::from_vec(vec![0.3, -0.7, 0.2, 0.5, -0.4, 0.1]);
    let r = minimal_period(&a, &x, &t).unwrap();
    let period = match r.value {
        PeriodValue::Finite(p) => p,
        _ => f64::NAN,
    };
    let back = flow_map(&a, period, &x, &t)
        .map(|y| (y - &x).norm())
        .unwrap_or(f64::INFINITY);
    let b = GeneratorMatrix::block_diag(&[rot(1.0), rot(2.0), rot(3.0)]);
    let freqs = |g: &GeneratorMatrix| {
        let mut f: Vec<f64> = imaginary_spectrum(g, &t)
            .unwrap()
            .iter()
            .filter(|z| z.im > 0.0)
            .map(|z| z.im)
            .collect();
        f.sort_by(f64::total_cmp);
        f
    };
    let (fa, fb) = (freqs(&a), freqs(&b));
    let multisets_differ = fa.len() == 3 && fb.len() == 3 && fa.iter().zip(&fb).any(|(p, q)| (p - q).abs() > 0.5);
    outcome(
        (period - TAU).abs() < 1e-8 && back < 1e-8 && multisets_differ,
        format!("period {period} (2π {TAU}), return error {back:.2e}, frequencies {fa:?} vs {fb:?}"),
    )
}

fn c8_hierarchy() -> Outcome {
    let t = tol();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let (mut violations, mut invariance_failures) = (0, 0);
    let (mut topo, mut holder, mut smooth) = (0, 0, 0);
    for k in 0..500 {
        let d = 1 + k % 4;
        let a = structured(d, &mut rng);
        let b = match k % 3 {
            // same data, different basis and a time rescaling
            0 => &conjugate(&a, &mut rng).into_matrix() * [0.5, 2.0, -1.0][rng.random_range(0..3)],
            _ => structured(d, &mut rng),
        };
        let (ga, gb) = (conjugate(&a, &mut rng), GeneratorMatrix::new(b).unwrap());
        let vt = decide_topological(&ga, &gb, &t).unwrap().equivalent;
        let vh = decide_holder(&ga, &gb, &t).unwrap().equivalent;
        let vs = decide_smooth(&ga, &gb, &t).unwrap().equivalent;
        let vl = (d <= 2).then(|| decide_lipschitz(&ga, &gb, &t).unwrap().equivalent);
        topo += usize::from(vt);
        holder += usize::from(vh);
        smooth += usize::from(vs);
        let chain_ok = match vl {
            Some(vl) => (!vh || vt) && (!vl || vh) && (!vs || vl),
            None => (!vh || vt) && (!vs || vh),
        };
        violations += usize::from(!chain_ok);

        let ca = conjugate(&a, &mut rng);
        let ga = GeneratorMatrix::new(a).unwrap();
        let same = decide_topological(&ga, &ca, &t).unwrap().equivalent
            && decide_holder(&ga, &ca, &t).unwrap().equivalent
            && decide_smooth(&ga, &ca, &t).unwrap().equivalent
            && (d > 2 || decide_lipschitz(&ga, &ca, &t).unwrap().equivalent);
        invariance_failures += usize::from(!same);
    }
    outcome(
        violations == 0 && invariance_failures == 0,
        format!(
            "{violations} chain violations, {invariance_failures} similarity failures over 500 pairs (equivalent: topological {topo}, holder {holder}, smooth {smooth})"
        ),
    )
}

fn c9_holder_estimates() -> Outcome {
    let s = HolderSampling::default();
    let p = estimate_holder_exponent(&power_map(vec![1.0 / SQRT_2, SQRT_2]).unwrap(), 1.0, &s)
        .unwrap()
        .beta;
    let i = estimate_holder_exponent(&ConjugacyMap::identity(2), 1.0, &s)
        .unwrap()
        .beta;
    outcome(
        (p - 1.0 / SQRT_2).abs() <= 0.05 && (i - 1.0).abs() <= 0.02,
        format!("power map {p:.4} (target {:.4}), identity {i:.4}", 1.0 / SQRT_2),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("conjugacy residuals", c1_block_to_diag),
        ("rotation unwind", c2_unwind),
        ("cross ratio constant", c3_cross_ratio),
        ("2x2 catalog completeness", c4_catalog),
        ("level separation witnesses", c5_witnesses),
        ("exponential oracle agreement", c6_exponential),
        ("period suite", c7_period),
        ("hierarchy property", c8_hierarchy),
        ("holder exponent estimation", c9_holder_estimates),
    ];
    let mut failed = Vec::new();
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        println!(
            "{} {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            k + 1,
            o.detail
        );
        if !o.pass {
            failed.push(k + 1);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
