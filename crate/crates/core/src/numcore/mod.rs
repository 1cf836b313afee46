//! Dense linear algebra kernel: spectra, ranks, kernels, intertwiners.

mod commutant;
mod eigen;
mod linalg;
mod structure;
mod svd;

pub use commutant::{
    commutant_basis, find_similarity, find_similarity_constrained, find_similarity_seeded, intertwiner_basis,
    with_similarity_seed, DEFAULT_SEED, SIMILARITY_DRAWS,
};
pub use eigen::{eigenvalues, raw_eigenvalues, EigenCluster, Spectrum};
pub use linalg::{
    complex_kernel_basis, complex_range_basis, inverse_condition, kernel_basis, numerical_rank, range_basis,
};

pub(crate) use commutant::current_seed;
pub(crate) use linalg::{kernel_basis_scaled, to_complex};
pub(crate) use structure::{block_sizes, shifted};
pub(crate) use svd::{kernel, rank_against, singular_values, top_directions, Scalar};
