//! Fourier representation of zero-mean vector fields on the 4-torus.

mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod ops;
pub mod physical;

pub use rustfft::num_complex::Complex64;

pub use field::{RandomSpectrum, SpectralVectorField, SOLENOIDAL_TOL};
pub use grid::WaveGrid;
pub use ops::{bilinear_term, h1dot_inner, hminus1_norm, leray_project, nonlinear_term};
pub use physical::{from_physical, gradient_physical, to_physical, PhysicalGradient, PhysicalVectorField, ScalarField};
