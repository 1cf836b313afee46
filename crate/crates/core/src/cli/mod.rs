//! Command-line front end: JSON matrices in, reports and files out.

mod document;
mod portrait;
mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;

pub use document::{read_matrix, Entry, Field, LoadedMatrix, MatrixDocument};
pub use portrait::{render_csv, render_svg, trace, Orbit, PortraitSpec};
pub use report::{classify, fingerprint, CanonicalPair, ClassificationReport, InputSummary, SkippedLevel};

use crate::conjugacy::{build_pipeline, verify_relation, SampleSpec};
use crate::equivalence::{canon2, decide, EquivalenceLevel};
use crate::error::LinflowError;
use crate::floweval::{minimal_period, PeriodValue};
use crate::flowstruct::{lyapunov_spectrum, scu_split};
use crate::numcore::{eigenvalues, with_similarity_seed, DEFAULT_SEED};
use crate::tolerance::ToleranceProfile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;
pub const EXIT_NOT_EQUIVALENT: i32 = 5;

pub const TOL_PROFILE_ENV: &str = "LINFLOW_TOL_PROFILE";

/// Failure with its process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn parse(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_PARSE,
            message: message.into(),
        }
    }

    pub fn dimension(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DIMENSION,
            message: message.into(),
        }
    }

    /// Map a library error raised while processing `who`.
    pub fn from_library(who: &str, e: LinflowError) -> Self {
        let code = match e {
            LinflowError::NotSquare { .. }
            | LinflowError::Empty
            | LinflowError::NonFinite { .. }
            | LinflowError::InvalidTolerance(_) => EXIT_PARSE,
            LinflowError::DimensionMismatch { .. }
            | LinflowError::UnsupportedDimension { .. }
            | LinflowError::OutOfScope(_)
            | LinflowError::Domain(_) => EXIT_DIMENSION,
            LinflowError::NumericalFailure { .. }
            | LinflowError::IllConditioned { .. }
            | LinflowError::NoInvertibleWitness { .. }
            | LinflowError::Range(_)
            | LinflowError::DegenerateSamples(_) => EXIT_NUMERICAL,
        };
        CliError {
            code,
            message: format!("{who}: {e}"),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "linflow", version, about = "Classify linear flows x' = Ax up to equivalence")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Tolerance override `key=value`; repeatable. Applied after the profile
    /// named by LINFLOW_TOL_PROFILE.
    #[arg(long = "tol", value_name = "KEY=VALUE")]
    tol: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide equivalence of two flows at one or all levels.
    Classify {
        a: PathBuf,
        b: PathBuf,
        /// topological | some-holder | holder | lipschitz | smooth | beta-minus:B | beta-plus:B | all
        #[arg(long, default_value = "all")]
        level: String,
        /// Write the JSON report here instead of printing text.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Canonical representative for d ≤ 2 (real) or complex d ≤ 2.
    Canon {
        a: PathBuf,
        #[arg(long)]
        level: String,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Eigenvalues, Lyapunov spectrum and the stable/central/unstable dimensions.
    Spectrum {
        a: PathBuf,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Build a conjugacy from the flow of A to the (time-rescaled) flow of B.
    Conjugate {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Check the conjugacy relation on the default sample grid.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Planar phase portrait as SVG, or CSV when the output ends in `.csv`.
    Portrait {
        a: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_name = "X0,X1,Y0,Y1", default_value = "-1,1,-1,1")]
        window: String,
        /// Show coordinates `I,J` of a higher-dimensional flow.
        #[arg(long, value_name = "I,J")]
        project: Option<String>,
        #[arg(long, default_value_t = 24)]
        count: usize,
        #[arg(long, default_value_t = 4.0)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Minimal period of a point.
    Period {
        a: PathBuf,
        /// Comma-separated coordinates (realified for complex inputs).
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[command(flatten)]
        tol: TolArgs,
    },
}

/// Resolve the tolerance profile from an optional profile file and overrides.
pub fn resolve_tolerance(profile: Option<&Path>, overrides: &[String]) -> Result<ToleranceProfile, CliError> {
    let mut tol = ToleranceProfile::default();
    let bad = |e: LinflowError| CliError::from_library("tolerance", e);
    if let Some(path) = profile {
        let label = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(format!("{label}: {e}")))?;
        let map: serde_json::Map<String, serde_json::Value> =
            serde_json::from_str(&text).map_err(|e| CliError::parse(format!("{label}: {e}")))?;
        for (k, v) in map {
            let x = v
                .as_f64()
                .ok_or_else(|| CliError::parse(format!("{label}: `{k}` is not a number")))?;
            tol.set(&k, x).map_err(|e| CliError::from_library(&label, e))?;
        }
    }
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::parse(format!("--tol {o}: expected KEY=VALUE")))?;
        let x: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::parse(format!("--tol {o}: `{v}` is not a number")))?;
        tol.set(k.trim(), x).map_err(bad)?;
    }
    tol.validate().map_err(bad)?;
    Ok(tol)
}

fn tolerance(args: &TolArgs) -> Result<ToleranceProfile, CliError> {
    let env = std::env::var_os(TOL_PROFILE_ENV).map(PathBuf::from);
    resolve_tolerance(env.as_deref(), &args.tol)
}

/// Parse a level name; `None` stands for `all`.
pub fn parse_level(s: &str) -> Result<Option<EquivalenceLevel>, CliError> {
    let beta = |v: &str| -> Result<f64, CliError> {
        v.parse()
            .map_err(|_| CliError::parse(format!("--level {s}: `{v}` is not a number")))
    };
    Ok(Some(match s {
        "all" => return Ok(None),
        "topological" => EquivalenceLevel::Topological,
        "some-holder" => EquivalenceLevel::SomeHolder,
        "holder" | "all-holder" => EquivalenceLevel::AllHolder,
        "lipschitz" => EquivalenceLevel::Lipschitz,
        "smooth" => EquivalenceLevel::Smooth,
        _ => match s.split_once(':') {
            Some(("beta-minus", v)) => EquivalenceLevel::BetaMinus(beta(v)?),
            Some(("beta-plus", v)) => EquivalenceLevel::BetaPlus(beta(v)?),
            _ => return Err(CliError::parse(format!("unknown level `{s}`"))),
        },
    }))
}

fn parse_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::parse(format!("{what}: `{p}` is not a finite number")))
        })
        .collect()
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn fmt_complex(re: f64, im: f64) -> String {
    match im {
        0.0 => format!("{re}"),
        _ if im < 0.0 => format!("{re}-{}i", -im),
        _ => format!("{re}+{im}i"),
    }
}

fn cmd_classify(
    a: &Path,
    b: &Path,
    level: &str,
    json: Option<&Path>,
    seed: u64,
    tol: &ToleranceProfile,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let (ma, mb) = (read_matrix(a)?, read_matrix(b)?);
    let (levels, lenient) = match parse_level(level)? {
        Some(l) => (vec![l], false),
        None => (
            vec![
                EquivalenceLevel::Topological,
                EquivalenceLevel::AllHolder,
                EquivalenceLevel::Lipschitz,
                EquivalenceLevel::Smooth,
            ],
            true,
        ),
    };
    let report = classify(&ma, &mb, &levels, lenient, tol, seed)?;
    match json {
        Some(p) => write_file(p, &report.to_json())?,
        None => {
            let _ = out.write_all(report.to_text().as_bytes());
        }
    }
    Ok(EXIT_OK)
}

fn cmd_canon(a: &Path, level: &str, tol: &ToleranceProfile, out: &mut dyn Write) -> Result<i32, CliError> {
    let m = read_matrix(a)?;
    let level = parse_level(level)?.ok_or_else(|| CliError::parse("canon needs a single level"))?;
    let c = canon2(&m.generator, level, tol).map_err(|e| CliError::from_library(&m.name, e))?;
    let mut s = format!("{} {}\n", level.name(), c.label);
    for (k, v) in &c.parameters {
        s += &format!("  {k} = {v}\n");
    }
    for row in &c.entries {
        s += &format!(
            "  [{}]\n",
            row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
        );
    }
    let _ = out.write_all(s.as_bytes());
    Ok(EXIT_OK)
}

fn cmd_spectrum(a: &Path, tol: &ToleranceProfile, out: &mut dyn Write) -> Result<i32, CliError> {
    let m = read_matrix(a)?;
    let err = |e| CliError::from_library(&m.name, e);
    let g = &m.generator;
    let spec = eigenvalues(g, tol).map_err(err)?;
    let f = scu_split(g, tol).map_err(err)?;
    let lya = lyapunov_spectrum(g, tol).map_err(err)?;
    let mut s = format!("{}  d={}\neigenvalues\n", m.name, g.dim());
    for c in spec.clusters() {
        let z = c.value;
        let v = if z.im == 0.0 {
            fmt_complex(z.re, 0.0)
        } else {
            format!("{} ± {}i", z.re, z.im)
        };
        s += &format!("  {v}  multiplicity {}\n", c.multiplicity);
    }
    s += &format!(
        "lyapunov [{}]\nd_s={} d_c={} d_u={}\n",
        lya.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "),
        f.d_s,
        f.d_c,
        f.d_u
    );
    let _ = out.write_all(s.as_bytes());
    Ok(EXIT_OK)
}

fn cmd_conjugate(
    a: &Path,
    b: &Path,
    path: &Path,
    verify: bool,
    seed: u64,
    tol: &ToleranceProfile,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, CliError> {
    let (ma, mb) = (read_matrix(a)?, read_matrix(b)?);
    // reuse the pair checks of the report builder
    classify(&ma, &mb, &[], true, tol, seed)?;
    let both = format!("{} vs {}", ma.name, mb.name);
    let lib = |e| CliError::from_library(&both, e);
    let (ga, gb) = (&ma.generator, &mb.generator);
    let found = with_similarity_seed(seed, || -> Result<_, CliError> {
        let mut last = None;
        for level in [
            EquivalenceLevel::Smooth,
            EquivalenceLevel::AllHolder,
            EquivalenceLevel::Topological,
        ] {
            let v = decide(ga, gb, level, tol).map_err(lib)?;
            if v.equivalent {
                let h = build_pipeline(ga, gb, &v, tol).map_err(lib)?;
                return Ok(Ok((v, h)));
            }
            last = Some(v);
        }
        Ok(Err(last.expect("three levels tried")))
    })?;
    let (v, h) = match found {
        Ok(x) => x,
        Err(v) => {
            let reasons: Vec<String> = v
                .reason
                .iter()
                .map(|r| {
                    serde_json::to_value(r)
                        .expect("enum")
                        .as_str()
                        .unwrap_or("")
                        .to_string()
                })
                .collect();
            let _ = writeln!(
                err,
                "linflow: {both}: not topologically equivalent ({})",
                reasons.join(", ")
            );
            return Ok(EXIT_NOT_EQUIVALENT);
        }
    };
    let alpha = v.alpha.unwrap_or(1.0);
    write_file(path, &(serde_json::to_string_pretty(&h).expect("finite map") + "\n"))?;
    let mut s = format!(
        "level {}  alpha={alpha}  kind={}  holder={}\nwrote {}\n",
        v.level.name(),
        h.kind_name(),
        h.holder_class(),
        path.display()
    );
    if verify {
        let samples = SampleSpec::grid(ga.dim(), 33, (-3.0, 3.0), 100, 1.0, seed);
        let r = verify_relation(&h, ga, gb, alpha, &samples).map_err(lib)?;
        s += &format!(
            "residual max={r:e} over {} times x {} points (seed {seed})\n",
            samples.times.len(),
            samples.points.len()
        );
    }
    let _ = out.write_all(s.as_bytes());
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_portrait(
    a: &Path,
    path: &Path,
    window: &str,
    project: Option<&str>,
    spec: PortraitSpec,
    tol: &ToleranceProfile,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let m = read_matrix(a)?;
    let w = parse_list(window, "--window")?;
    if w.len() != 4 || !(w[0] < w[1] && w[2] < w[3]) {
        return Err(CliError::parse(format!(
            "--window {window}: expected x0,x1,y0,y1 with x0<x1, y0<y1"
        )));
    }
    let d = m.generator.dim();
    let project = match project {
        Some(p) => {
            let ij = parse_list(p, "--project")?;
            if ij.len() != 2 || ij.iter().any(|v| v.fract() != 0.0 || *v < 0.0 || *v as usize >= d) || ij[0] == ij[1] {
                return Err(CliError::dimension(format!(
                    "--project {p}: need two distinct coordinates below {d}"
                )));
            }
            (ij[0] as usize, ij[1] as usize)
        }
        None if d == 2 => (0, 1),
        None => {
            return Err(CliError::dimension(format!(
                "{}: portraits need d = 2 (got {d}); pass --project I,J",
                m.name
            )))
        }
    };
    let spec = PortraitSpec {
        window: [w[0], w[1], w[2], w[3]],
        project,
        ..spec
    };
    let orbits = trace(&m.generator, &spec, tol).map_err(|e| CliError::from_library(&m.name, e))?;
    let csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    let body = if csv {
        render_csv(&orbits)
    } else {
        render_svg(&orbits, spec.window)
    };
    write_file(path, &body)?;
    let _ = writeln!(out, "wrote {} ({} orbits)", path.display(), orbits.len());
    Ok(EXIT_OK)
}

fn cmd_period(a: &Path, x: &str, tol: &ToleranceProfile, out: &mut dyn Write) -> Result<i32, CliError> {
    let m = read_matrix(a)?;
    let xs = parse_list(x, "--x")?;
    let d = m.generator.dim();
    if xs.len() != d {
        return Err(CliError::dimension(format!(
            "--x has {} coordinates, {} needs {d}",
            xs.len(),
            m.name
        )));
    }
    let r =
        minimal_period(&m.generator, &DVector::from_vec(xs), tol).map_err(|e| CliError::from_library(&m.name, e))?;
    let mut s = match r.value {
        PeriodValue::Zero => "period 0 (fixed point)\n".to_string(),
        PeriodValue::Finite(t) => format!("period {t}\n"),
        PeriodValue::Infinite => "period infinite\n".to_string(),
    };
    if !r.frequencies.is_empty() {
        s += &format!(
            "frequencies [{}]\n",
            r.frequencies
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    if let Some(w) = &r.commensurability_witness {
        s += &format!(
            "ratios to the lowest frequency [{}]\n",
            w.iter().map(|(p, q)| format!("{p}/{q}")).collect::<Vec<_>>().join(", ")
        );
    }
    let _ = out.write_all(s.as_bytes());
    Ok(EXIT_OK)
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Classify {
            a,
            b,
            level,
            json,
            seed,
            tol,
        } => tolerance(tol).and_then(|t| cmd_classify(a, b, level, json.as_deref(), *seed, &t, out)),
        Command::Canon { a, level, tol } => tolerance(tol).and_then(|t| cmd_canon(a, level, &t, out)),
        Command::Spectrum { a, tol } => tolerance(tol).and_then(|t| cmd_spectrum(a, &t, out)),
        Command::Conjugate {
            a,
            b,
            out: path,
            verify,
            seed,
            tol,
        } => tolerance(tol).and_then(|t| cmd_conjugate(a, b, path, *verify, *seed, &t, out, err)),
        Command::Portrait {
            a,
            out: path,
            window,
            project,
            count,
            t_max,
            steps,
            seed,
            tol,
        } => {
            let spec = PortraitSpec {
                count: *count,
                t_max: *t_max,
                steps: (*steps).max(1),
                seed: *seed,
                ..Default::default()
            };
            tolerance(tol).and_then(|t| cmd_portrait(a, path, window, project.as_deref(), spec, &t, out))
        }
        Command::Period { a, x, tol } => tolerance(tol).and_then(|t| cmd_period(a, x, &t, out)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "linflow: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels() {
        assert_eq!(parse_level("all").unwrap(), None);
        assert_eq!(parse_level("holder").unwrap(), Some(EquivalenceLevel::AllHolder));
        assert_eq!(
            parse_level("beta-minus:0.5").unwrap(),
            Some(EquivalenceLevel::BetaMinus(0.5))
        );
        assert_eq!(parse_level("bogus").unwrap_err().code, EXIT_PARSE);
    }

    #[test]
    fn tolerance_overrides() {
        let t = resolve_tolerance(None, &["rank_tol=1e-9".into()]).unwrap();
        assert_eq!(t.rank_tol, 1e-9);
        assert_eq!(
            resolve_tolerance(None, &["rank_tol".into()]).unwrap_err().code,
            EXIT_PARSE
        );
        assert_eq!(
            resolve_tolerance(None, &["nope=1".into()]).unwrap_err().code,
            EXIT_PARSE
        );
        assert_eq!(
            resolve_tolerance(None, &["rank_tol=-1".into()]).unwrap_err().code,
            EXIT_PARSE
        );
    }

    #[test]
    fn tolerance_profile_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("tol.json");
        std::fs::write(&p, r#"{"residual_tol": 1e-7}"#).unwrap();
        let t = resolve_tolerance(Some(&p), &["residual_tol=1e-6".into()]).unwrap();
        assert_eq!(t.residual_tol, 1e-6);
        let t = resolve_tolerance(Some(&p), &[]).unwrap();
        assert_eq!(t.residual_tol, 1e-7);
    }

    #[test]
    fn error_codes() {
        let e = CliError::from_library("x", LinflowError::OutOfScope("y".into()));
        assert_eq!(e.code, EXIT_DIMENSION);
        let e = CliError::from_library("x", LinflowError::IllConditioned { condition: 1e12 });
        assert_eq!(e.code, EXIT_NUMERICAL);
        assert!(e.message.starts_with("x: "));
    }
}
