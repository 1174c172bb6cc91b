//! Explicit constants, the frame inequalities used by the trace estimate,
//! the dimension bound and a CLR sanity check.

pub mod bound;
pub mod clr;
pub mod constants;
pub mod frame_bounds;

pub use bound::{dimension_bound, BoundReport};
pub use clr::{clr_count, clr_cross_check, deep_well_family, ClrReport, ClrSpec, WellProfile};
pub use constants::{constants, l_upper_4d, q_bound, rho_bound, Constant, ConstantTable};
pub use frame_bounds::{
    matrix_bound_check, rho, rho_bound_check, rho_bound_nested, trace_chain_nested, ChainSample,
    RhoReport,
};
