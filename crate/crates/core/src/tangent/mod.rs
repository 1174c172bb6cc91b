//! The equation of variations along a trajectory: orthonormal tangent
//! frames, their n-traces and the time-averaged traces `q(n)`.

pub mod estimate;
pub mod frame;
pub mod oracle;
pub mod trace;

pub use estimate::{
    dimension_crossing, q_estimate, q_sweep, Crossing, TraceChecks, TraceConfig, TraceReport,
    TraceSweep,
};
pub use frame::{orthonormalize, TangentFrame, ORTHONORMAL_TOL};
pub use oracle::{dense_jacobian, frame_trace, trace_oracle, ModeBasis, ORACLE_MAX_N_PER_DIM};
pub use trace::{frame_advection, trace_n, trace_routes, variational_rhs, TraceRoutes, ROUTE_TOL};
