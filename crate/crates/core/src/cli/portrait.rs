use std::fmt::Write as _;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::floweval::LinearFlow;
use crate::matrix::GeneratorMatrix;
use crate::tolerance::ToleranceProfile;

const SIZE: f64 = 600.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitSpec {
    /// `x0, x1, y0, y1`.
    pub window: [f64; 4],
    /// Number of seeded initial conditions.
    pub count: usize,
    /// Orbits are traced over `[−t_max, t_max]`.
    pub t_max: f64,
    pub steps: usize,
    pub seed: u64,
    /// Coordinates shown when `d > 2`.
    pub project: (usize, usize),
}

impl Default for PortraitSpec {
    fn default() -> Self {
        PortraitSpec {
            window: [-1.0, 1.0, -1.0, 1.0],
            count: 24,
            t_max: 4.0,
            steps: 200,
            seed: 1,
            project: (0, 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub start: (f64, f64),
    /// Consecutive samples; `None` marks a point outside the window.
    pub points: Vec<Option<(f64, f64)>>,
    pub fixed: bool,
}

pub fn trace(a: &GeneratorMatrix, spec: &PortraitSpec, tol: &ToleranceProfile) -> Result<Vec<Orbit>> {
    let [x0, x1, y0, y1] = spec.window;
    let (i, j) = spec.project;
    let flow = LinearFlow::new(a, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let times: Vec<f64> = (0..=spec.steps)
        .map(|k| -spec.t_max + 2.0 * spec.t_max * k as f64 / spec.steps as f64)
        .collect();
    let maps: Vec<_> = times.iter().map(|&t| flow.matrix(t)).collect::<Result<_>>()?;
    let inside = |p: &DVector<f64>| {
        let (x, y) = (p[i], p[j]);
        (x0..=x1).contains(&x) && (y0..=y1).contains(&y)
    };
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let mut x = DVector::zeros(a.dim());
        x[i] = rng.random_range(x0..=x1);
        x[j] = rng.random_range(y0..=y1);
        let pts: Vec<DVector<f64>> = maps.iter().map(|m| m * &x).collect();
        let scale = 1.0 + x.norm();
        let fixed = pts.iter().all(|p| (p - &x).norm() <= 1e-12 * scale);
        out.push(Orbit {
            start: (x[i], x[j]),
            points: pts.iter().map(|p| inside(p).then(|| (p[i], p[j]))).collect(),
            fixed,
        });
    }
    Ok(out)
}

pub fn render_svg(orbits: &[Orbit], window: [f64; 4]) -> String {
    let [x0, x1, y0, y1] = window;
    let sx = |x: f64| (x - x0) / (x1 - x0) * SIZE;
    let sy = |y: f64| SIZE - (y - y0) / (y1 - y0) * SIZE;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r##"<rect width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##);
    if x0 < 0.0 && x1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{0:.3}" y1="0" x2="{0:.3}" y2="{SIZE}" stroke="#cccccc"/>"##,
            sx(0.0)
        );
    }
    if y0 < 0.0 && y1 > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="0" y1="{0:.3}" x2="{SIZE}" y2="{0:.3}" stroke="#cccccc"/>"##,
            sy(0.0)
        );
    }
    for o in orbits {
        if o.fixed {
            let _ = writeln!(
                s,
                r##"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="#1f4e79"/>"##,
                sx(o.start.0),
                sy(o.start.1)
            );
            continue;
        }
        for run in o.points.split(|p| p.is_none()) {
            if run.len() < 2 {
                continue;
            }
            let pts: Vec<String> = run
                .iter()
                .flatten()
                .map(|(x, y)| format!("{:.3},{:.3}", sx(*x), sy(*y)))
                .collect();
            let _ = writeln!(
                s,
                r##"<polyline points="{}" fill="none" stroke="#1f4e79" stroke-width="1"/>"##,
                pts.join(" ")
            );
        }
        let _ = writeln!(
            s,
            r##"<circle cx="{:.3}" cy="{:.3}" r="1.5" fill="#c0392b"/>"##,
            sx(o.start.0),
            sy(o.start.1)
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `orbit,t_index,x,y` rows for the in-window samples.
pub fn render_csv(orbits: &[Orbit]) -> String {
    let mut s = String::from("orbit,step,x,y\n");
    for (k, o) in orbits.iter().enumerate() {
        for (n, p) in o.points.iter().enumerate() {
            if let Some((x, y)) = p {
                let _ = writeln!(s, "{k},{n},{x},{y}");
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    #[test]
    fn rotation_orbits_are_circles() {
        let a = GeneratorMatrix::jordan_complex(1, 0.0, 1.0);
        let spec = PortraitSpec {
            window: [-2.0, 2.0, -2.0, 2.0],
            count: 5,
            ..Default::default()
        };
        for o in trace(&a, &spec, &tol()).unwrap() {
            let r0 = (o.start.0.powi(2) + o.start.1.powi(2)).sqrt();
            for (x, y) in o.points.iter().flatten() {
                assert!(((x * x + y * y).sqrt() - r0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_generator_gives_points() {
        let orbits = trace(&GeneratorMatrix::zeros(2), &PortraitSpec::default(), &tol()).unwrap();
        assert!(orbits.iter().all(|o| o.fixed));
        let svg = render_svg(&orbits, PortraitSpec::default().window);
        assert!(!svg.contains("polyline"));
        assert_eq!(svg.matches("<circle").count(), orbits.len());
    }

    #[test]
    fn saddle_leaves_window_and_is_deterministic() {
        let a = GeneratorMatrix::diag(&[-1.0, 1.0]);
        let spec = PortraitSpec::default();
        let o = trace(&a, &spec, &tol()).unwrap();
        assert!(o.iter().all(|o| o.points.iter().any(|p| p.is_none())));
        assert_eq!(
            render_svg(&o, spec.window),
            render_svg(&trace(&a, &spec, &tol()).unwrap(), spec.window)
        );
        assert!(render_csv(&o).starts_with("orbit,step,x,y\n"));
    }
}
