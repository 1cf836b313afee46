//! Deciders for the equivalence levels and the low-dimensional catalogs.

mod beta;
mod canon;
mod complex;
mod deciders;
mod verdict;

pub use beta::{cross_ratio, cross_ratio_from_spectra, decide_beta, BetaSide, CrossRatio};
pub use canon::{canon2, canon2_complex, decide_lipschitz, derealify, CanonicalForm};
pub use complex::{classify_complex, decide};
pub use deciders::{alpha_candidates, decide_holder, decide_smooth, decide_topological};
pub use verdict::{EquivalenceLevel, EquivalenceVerdict, ReasonCode};
