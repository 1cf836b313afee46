use std::fmt;

use serde::{Deserialize, Serialize};

/// Classification level, from coarsest to finest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", content = "beta", rename_all = "kebab-case")]
pub enum EquivalenceLevel {
    Topological,
    SomeHolder,
    BetaMinus(f64),
    BetaPlus(f64),
    AllHolder,
    Lipschitz,
    Smooth,
}

impl EquivalenceLevel {
    /// Position in the implication chain; the beta levels sit between
    /// some-Hölder and all-Hölder, with `β⁺` finer than `β⁻`.
    fn rank(&self) -> f64 {
        match self {
            EquivalenceLevel::Topological => 0.0,
            EquivalenceLevel::SomeHolder => 0.5,
            EquivalenceLevel::BetaMinus(b) => 1.0 + b,
            EquivalenceLevel::BetaPlus(b) => 1.0 + b + 1e-9,
            EquivalenceLevel::AllHolder => 2.5,
            EquivalenceLevel::Lipschitz => 3.0,
            EquivalenceLevel::Smooth => 4.0,
        }
    }

    /// The β-free levels, coarsest first.
    pub fn chain() -> [EquivalenceLevel; 5] {
        [
            EquivalenceLevel::Topological,
            EquivalenceLevel::SomeHolder,
            EquivalenceLevel::AllHolder,
            EquivalenceLevel::Lipschitz,
            EquivalenceLevel::Smooth,
        ]
    }

    /// Levels whose verdict follows from `self`: coarser levels when
    /// equivalent, finer ones when not.
    pub fn implied(&self, equivalent: bool) -> Vec<EquivalenceLevel> {
        let r = self.rank();
        let mut out: Vec<EquivalenceLevel> = Self::chain()
            .into_iter()
            .filter(|l| if equivalent { l.rank() < r } else { l.rank() > r })
            .collect();
        match (*self, equivalent) {
            (EquivalenceLevel::BetaPlus(b), true) => out.push(EquivalenceLevel::BetaMinus(b)),
            (EquivalenceLevel::BetaMinus(b), false) => out.push(EquivalenceLevel::BetaPlus(b)),
            _ => {}
        }
        // topological and some-Hölder coincide for linear flows
        if !equivalent && *self == EquivalenceLevel::SomeHolder {
            out.insert(0, EquivalenceLevel::Topological);
        }
        if equivalent && *self == EquivalenceLevel::Topological {
            out.push(EquivalenceLevel::SomeHolder);
        }
        out
    }

    pub fn name(&self) -> String {
        match self {
            EquivalenceLevel::Topological => "topological".into(),
            EquivalenceLevel::SomeHolder => "some-holder".into(),
            EquivalenceLevel::BetaMinus(b) => format!("beta-minus({b})"),
            EquivalenceLevel::BetaPlus(b) => format!("beta-plus({b})"),
            EquivalenceLevel::AllHolder => "all-holder".into(),
            EquivalenceLevel::Lipschitz => "lipschitz".into(),
            EquivalenceLevel::Smooth => "smooth".into(),
        }
    }
}

impl fmt::Display for EquivalenceLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Structured reasons attached to a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReasonCode {
    DimsMismatch,
    CentralDimMismatch,
    CentralNotSimilar,
    LyapunovMismatch,
    NotSimilar,
    ComplexLinearNotSimilar,
    CatalogMismatch,
    CatalogMatch,
    HyperbolicDimsMatch,
    CentralSimilar,
    LyapunovSimilar,
    Similar,
    CrossRatioBound,
    Boundary,
    SufficientConditionHolds,
    Unknown,
}

/// Outcome of one decider.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceVerdict {
    pub level: EquivalenceLevel,
    pub equivalent: bool,
    /// Time-rescaling witness in `h(e^{tA}x) = e^{αtB}h(x)`.
    pub alpha: Option<f64>,
    pub time_reversed: bool,
    pub reason: Vec<ReasonCode>,
    pub implied: Vec<EquivalenceLevel>,
    /// `false` only where the theory gives a one-sided test and it was inconclusive.
    pub conclusive: bool,
}

impl EquivalenceVerdict {
    pub(crate) fn yes(level: EquivalenceLevel, alpha: f64, reason: Vec<ReasonCode>) -> Self {
        EquivalenceVerdict {
            level,
            equivalent: true,
            alpha: Some(alpha),
            time_reversed: alpha < 0.0,
            reason,
            implied: level.implied(true),
            conclusive: true,
        }
    }

    pub(crate) fn no(level: EquivalenceLevel, reason: Vec<ReasonCode>) -> Self {
        EquivalenceVerdict {
            level,
            equivalent: false,
            alpha: None,
            time_reversed: false,
            reason,
            implied: level.implied(false),
            conclusive: true,
        }
    }
}
