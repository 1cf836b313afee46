use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::document::{Field, LoadedMatrix};
use super::CliError;
use crate::equivalence::{
    canon2, classify_complex, cross_ratio, decide, CanonicalForm, CrossRatio, EquivalenceLevel, EquivalenceVerdict,
};
use crate::error::LinflowError;
use crate::flowstruct::{lyapunov_spectrum, scu_split};
use crate::numcore::with_similarity_seed;
use crate::tolerance::ToleranceProfile;

pub const TOOL_NAME: &str = "linflow";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub name: String,
    pub field: Field,
    pub dim: usize,
}

/// A level that was part of `--level all` but has no decider at this dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedLevel {
    pub level: EquivalenceLevel,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPair {
    pub level: EquivalenceLevel,
    pub a: CanonicalForm,
    pub b: CanonicalForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub tool: String,
    pub version: String,
    /// SHA-256 over tool, version, tolerance profile and seed.
    pub fingerprint: String,
    pub seed: u64,
    pub tolerance: ToleranceProfile,
    pub inputs: Vec<InputSummary>,
    /// Lyapunov spectra of the real generators, ascending.
    pub lyapunov: Vec<Vec<f64>>,
    pub verdicts: Vec<EquivalenceVerdict>,
    #[serde(default)]
    pub skipped: Vec<SkippedLevel>,
    #[serde(default)]
    pub canonical: Vec<CanonicalPair>,
    pub cross_ratio: Option<CrossRatio>,
    /// `√ρ`, the β threshold, when the cross ratio is positive.
    pub beta_star: Option<f64>,
}

pub fn fingerprint(tol: &ToleranceProfile, seed: u64) -> String {
    let canonical = serde_json::json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "tolerance": tol,
        "seed": seed,
    });
    let digest = Sha256::digest(canonical.to_string().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn named(who: &LoadedMatrix) -> impl Fn(LinflowError) -> CliError + '_ {
    move |e| CliError::from_library(&who.name, e)
}

fn summary(m: &LoadedMatrix) -> InputSummary {
    InputSummary {
        name: m.name.clone(),
        field: m.field,
        dim: m.dim(),
    }
}

/// Run the requested deciders. With `lenient`, levels whose decider is out of
/// scope at this dimension are listed as skipped instead of failing.
pub fn classify(
    a: &LoadedMatrix,
    b: &LoadedMatrix,
    levels: &[EquivalenceLevel],
    lenient: bool,
    tol: &ToleranceProfile,
    seed: u64,
) -> Result<ClassificationReport, CliError> {
    if a.field != b.field {
        return Err(CliError::dimension(format!(
            "{}: field {} differs from {}'s {}",
            b.name, b.field, a.name, a.field
        )));
    }
    if a.dim() != b.dim() {
        return Err(CliError::dimension(format!(
            "{}: dimension {} differs from {}'s {}",
            b.name,
            b.dim(),
            a.name,
            a.dim()
        )));
    }
    let (ga, gb) = (&a.generator, &b.generator);
    let both = format!("{} vs {}", a.name, b.name);
    let lyapunov = vec![
        lyapunov_spectrum(ga, tol).map_err(named(a))?,
        lyapunov_spectrum(gb, tol).map_err(named(b))?,
    ];

    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    for &level in levels {
        let r = with_similarity_seed(seed, || match (&a.complex, &b.complex) {
            (Some(m), Some(n)) => classify_complex(m, n, level, tol),
            _ => decide(ga, gb, level, tol),
        });
        match r {
            Ok(v) => verdicts.push(v),
            Err(e @ (LinflowError::OutOfScope(_) | LinflowError::UnsupportedDimension { .. })) if lenient => skipped
                .push(SkippedLevel {
                    level,
                    reason: e.to_string(),
                }),
            Err(e) => return Err(CliError::from_library(&both, e)),
        }
    }

    let mut canonical = Vec::new();
    for &level in levels {
        if matches!(level, EquivalenceLevel::BetaMinus(_) | EquivalenceLevel::BetaPlus(_)) {
            continue;
        }
        match (canon2(ga, level, tol), canon2(gb, level, tol)) {
            (Ok(ca), Ok(cb)) => canonical.push(CanonicalPair { level, a: ca, b: cb }),
            (Err(LinflowError::UnsupportedDimension { .. }), _) => break,
            (Err(e), _) => return Err(CliError::from_library(&a.name, e)),
            (_, Err(e)) => return Err(CliError::from_library(&b.name, e)),
        }
    }

    let (fa, fb) = (
        scu_split(ga, tol).map_err(named(a))?,
        scu_split(gb, tol).map_err(named(b))?,
    );
    let cross = if fa.is_hyperbolic() && fb.is_hyperbolic() {
        Some(cross_ratio(&fa, &fb).map_err(|e| CliError::from_library(&both, e))?)
    } else {
        None
    };
    let beta_star = cross.filter(|c| c.positive).map(|c| c.rho.sqrt());

    Ok(ClassificationReport {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        fingerprint: fingerprint(tol, seed),
        seed,
        tolerance: *tol,
        inputs: vec![summary(a), summary(b)],
        lyapunov,
        verdicts,
        skipped,
        canonical,
        cross_ratio: cross,
        beta_star,
    })
}

fn list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

fn params(c: &CanonicalForm) -> String {
    if c.parameters.is_empty() {
        c.label.clone()
    } else {
        let p: Vec<String> = c.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{} ({})", c.label, p.join(", "))
    }
}

impl ClassificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let t = &self.tolerance;
        let _ = writeln!(s, "{} {}", self.tool, self.version);
        let _ = writeln!(s, "fingerprint {}", self.fingerprint);
        let _ = writeln!(
            s,
            "tolerance   eig_cluster_tol={:e} rank_tol={:e} residual_tol={:e} alpha_match_tol={:e}  seed={}",
            t.eig_cluster_tol, t.rank_tol, t.residual_tol, t.alpha_match_tol, self.seed
        );
        s.push('\n');
        for (tag, (inp, lya)) in ["A", "B"].iter().zip(self.inputs.iter().zip(&self.lyapunov)) {
            let _ = writeln!(s, "{tag}  {}  ({}, d={})", inp.name, inp.field, inp.dim);
            let _ = writeln!(s, "   lyapunov [{}]", list(lya));
        }
        if let Some(c) = &self.cross_ratio {
            let _ = write!(s, "cross ratio rho={} rho+={}", c.rho, c.rho_plus);
            if let Some(b) = self.beta_star {
                let _ = write!(s, "  beta*={b}");
            }
            s.push('\n');
        }
        s.push('\n');
        for v in &self.verdicts {
            let name = v.level.name();
            let _ = write!(s, "{name:<14}{}", if v.equivalent { "yes" } else { "no " });
            if let Some(a) = v.alpha {
                let _ = write!(s, "  alpha={a}");
            }
            if v.time_reversed {
                s.push_str("  time-reversed");
            }
            if !v.conclusive {
                s.push_str("  inconclusive");
            }
            let reasons: Vec<String> = v
                .reason
                .iter()
                .map(|r| {
                    serde_json::to_value(r)
                        .ok()
                        .and_then(|x| x.as_str().map(String::from))
                        .unwrap_or_default()
                })
                .collect();
            let _ = writeln!(s, "  [{}]", reasons.join(", "));
        }
        for k in &self.skipped {
            let _ = writeln!(s, "{:<14}skipped  ({})", k.level.name(), k.reason);
        }
        if !self.canonical.is_empty() {
            s.push('\n');
            for c in &self.canonical {
                let _ = writeln!(
                    s,
                    "canonical {:<13} A: {}   B: {}",
                    c.level.name(),
                    params(&c.a),
                    params(&c.b)
                );
            }
        }
        s
    }
}
