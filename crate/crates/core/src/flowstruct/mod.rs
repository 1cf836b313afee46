//! Structure of a single linear flow: Jordan data, invariant splitting,
//! Lyapunov exponents and spaces, realification and time reversal.

mod jordan;
mod split;

pub use jordan::{generalized_kernel, real_jordan, RealJordanBlock, RealJordanDecomposition};
pub use split::{
    complex_structure, lyapunov_space, lyapunov_spectrum, realify, scu_split, time_reverse, FlowDecomposition, Part,
};
