//! Evaluation of the flows themselves: exponentials, orbits, fixed points
//! and periods.

mod flow;
mod period;

pub use flow::{exp_oracle, flow_map, LinearFlow, OrbitSample};
pub use period::{
    fixed_space, imaginary_spectrum, minimal_period, periodic_subspace, rational_approximation, PeriodResult,
    PeriodValue, MAX_DENOMINATOR,
};
