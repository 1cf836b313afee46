//! Classification of linear flows `t ↦ e^{tA}` up to topological, Hölder,
//! Lipschitz and smooth equivalence, with explicit conjugacies.

pub mod cli;
pub mod conjugacy;
pub mod equivalence;
pub mod error;
pub mod floweval;
pub mod flowstruct;
pub mod matrix;
pub mod numcore;
pub mod tolerance;

pub use error::{LinflowError, Result};
pub use matrix::{CMatrix, GeneratorMatrix, Matrix, Origin};
pub use tolerance::ToleranceProfile;
