//! Numerical thresholds shared by every decider.
//!
//! All classification statements are exact, so every cutoff used to turn
//! floating point data into discrete structure lives here and nowhere else.

use serde::{Deserialize, Serialize};

use crate::error::{LinflowError, Result};

/// Bundle of numerical thresholds.
///
/// `eig_cluster_tol` is a coefficient: the absolute merge radius used for a
/// matrix `A` is `eig_cluster_tol * (1 + ‖A‖)`, see [`ToleranceProfile::eig_radius`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    pub eig_cluster_tol: f64,
    pub rank_tol: f64,
    pub residual_tol: f64,
    pub alpha_match_tol: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile {
            eig_cluster_tol: 1e-8,
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            alpha_match_tol: 1e-8,
        }
    }
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eig_cluster_tol", self.eig_cluster_tol),
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
            ("alpha_match_tol", self.alpha_match_tol),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(LinflowError::InvalidTolerance(format!(
                    "{name} must be finite and strictly positive, got {v}"
                )));
            }
        }
        if self.eig_cluster_tol < f64::EPSILON {
            return Err(LinflowError::InvalidTolerance(format!(
                "eig_cluster_tol {} is below machine epsilon",
                self.eig_cluster_tol
            )));
        }
        Ok(())
    }

    /// Absolute eigenvalue merge radius for a matrix of norm `norm`.
    pub fn eig_radius(&self, norm: f64) -> f64 {
        self.eig_cluster_tol * (1.0 + norm)
    }

    /// Radius inside which nearby clusters are tested for a defective merge.
    pub(crate) fn defect_radius(&self, norm: f64) -> f64 {
        self.eig_cluster_tol.sqrt() * (1.0 + norm)
    }

    /// Apply a `key=value` override as accepted on the command line.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "eig_cluster_tol" => self.eig_cluster_tol = value,
            "rank_tol" => self.rank_tol = value,
            "residual_tol" => self.residual_tol = value,
            "alpha_match_tol" => self.alpha_match_tol = value,
            other => {
                return Err(LinflowError::InvalidTolerance(format!(
                    "unknown tolerance key `{other}`"
                )))
            }
        }
        self.validate()
    }

    /// Relative comparison used for matching spectral ratios.
    pub fn ratio_eq(&self, x: f64, y: f64) -> bool {
        (x - y).abs() <= self.alpha_match_tol * (1.0 + x.abs().max(y.abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let t = ToleranceProfile::default();
        t.validate().unwrap();
        assert_eq!(t.eig_radius(0.0), 1e-8);
        assert_eq!(t.eig_radius(1.0), 2e-8);
    }

    #[test]
    fn rejects_nonpositive_and_unknown() {
        let mut t = ToleranceProfile::default();
        assert!(t.set("rank_tol", 0.0).is_err());
        let mut t = ToleranceProfile::default();
        assert!(t.set("nope", 1.0).is_err());
        let mut t = ToleranceProfile::default();
        t.set("residual_tol", 1e-6).unwrap();
        assert_eq!(t.residual_tol, 1e-6);
    }
}
