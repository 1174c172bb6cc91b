//! Pseudo-spectral simulation of the limiting Navier-Stokes-Voigt system
//!
//! ```text
//! -Δ ∂t u + (u·∇)u + ∇p = νΔu + g,   div u = 0
//! ```
//!
//! on the zero-mean 4-torus, together with the diagnostics used to bound the
//! fractal dimension of its global attractor: energy and dissipativity
//! checks, Ḣ¹-orthonormal tangent frames and their n-traces, and the
//! explicit constants of the dimension bound.

pub mod error;
pub mod inequality;
pub mod solver;
pub mod spectral;
pub mod tangent;

pub use error::{Error, Result};
pub use solver::{ForcingSpec, SolverConfig, TrajectoryLog};
pub use tangent::{TangentFrame, TraceReport};
pub use inequality::{BoundReport, ConstantTable};
pub use spectral::{
    h1dot_inner, hminus1_norm, leray_project, nonlinear_term, RandomSpectrum, SpectralVectorField,
    WaveGrid,
};
