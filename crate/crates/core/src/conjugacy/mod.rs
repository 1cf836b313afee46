//! Explicit conjugacies between linear flows and their numerical checks.

mod build;
mod map;
mod verify;

pub use build::{
    build_block_to_diag, build_complex_block_to_diag, build_pipeline, build_power_map, build_unwind, linear_map,
    power_map, product_map,
};
pub use map::{ConjugacyMap, HolderClass, MapDocument, MapKind};
pub use verify::{
    estimate_holder_exponent, verify_relation, HolderEstimate, HolderSampling, SampleSpec, DEFAULT_SAMPLE_SEED,
};
