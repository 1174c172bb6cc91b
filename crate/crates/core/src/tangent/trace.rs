use serde::{Deserialize, Serialize};

use super::frame::TangentFrame;
use crate::error::{Error, Result};
use crate::solver::integrate::assemble_rhs;
use crate::spectral::ops::{bilinear_with, PackedPhysical};
use crate::spectral::{gradient_physical, h1dot_inner, to_physical, SpectralVectorField};

/// Relative agreement required between the two trace routes.
pub const ROUTE_TOL: f64 = 1e-10;

/// The linearization of the projected system at `u`:
/// `L_u v = (-Δ)^{-1} P (-(u . grad) v - (v . grad) u + nu Δ v)`.
pub fn variational_rhs(u: &SpectralVectorField, v: &SpectralVectorField, nu: f64) -> Result<SpectralVectorField> {
    u.grid().check_same(v.grid())?;
    u.check_solenoidal()?;
    let pu = PackedPhysical::from_field(u);
    variational_with(&pu, v, nu)
}

pub(crate) fn variational_with(pu: &PackedPhysical, v: &SpectralVectorField, nu: f64) -> Result<SpectralVectorField> {
    let b = bilinear_with(pu, v)?;
    Ok(assemble_rhs(v, None, &b, nu))
}

/// `sum_i ((v_i . grad) u, v_i)_{L^2}`, integrated exactly on the native
/// grid or the `3K+1` grid, whichever is finer.
pub fn frame_advection(u: &SpectralVectorField, frame: &TangentFrame) -> Result<f64> {
    let m = u.grid().exact_quadrature_points(3);
    let grad = gradient_physical(u, m)?;
    let mut acc = 0.0;
    for v in frame.fields() {
        u.grid().check_same(v.grid())?;
        let p = to_physical(v, m)?;
        for x in 0..m.pow(4) {
            let vx = p.at(x);
            for j in 0..4 {
                for k in 0..4 {
                    acc += vx[j] * grad.grad[k][j][x] * vx[k];
                }
            }
        }
    }
    Ok(acc * (u.grid().box_length() / m as f64).powi(4))
}

/// Both evaluations of the n-trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRoutes {
    /// `sum_i (grad L_u v_i, grad v_i)`
    pub definition: f64,
    /// `-nu n - sum_i ((v_i . grad) u, v_i)`
    pub reduced: f64,
}

impl TraceRoutes {
    pub fn relative_gap(&self) -> f64 {
        let scale = self.definition.abs().max(self.reduced.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.definition - self.reduced).abs() / scale
        }
    }
}

pub fn trace_routes(u: &SpectralVectorField, frame: &TangentFrame, nu: f64) -> Result<TraceRoutes> {
    frame.check_orthonormal()?;
    u.check_solenoidal()?;
    let pu = PackedPhysical::from_field(u);
    let mut definition = 0.0;
    for v in frame.fields() {
        u.grid().check_same(v.grid())?;
        definition += h1dot_inner(&variational_with(&pu, v, nu)?, v)?;
    }
    let reduced = -nu * frame.len() as f64 - frame_advection(u, frame)?;
    Ok(TraceRoutes { definition, reduced })
}

/// The n-trace `sum_i (grad L_u v_i, grad v_i)` over an orthonormal frame.
/// Fails if the reduced form disagrees beyond [`ROUTE_TOL`].
pub fn trace_n(u: &SpectralVectorField, frame: &TangentFrame, nu: f64) -> Result<f64> {
    let routes = trace_routes(u, frame, nu)?;
    let gap = routes.relative_gap();
    if gap > ROUTE_TOL || gap.is_nan() {
        return Err(Error::InvariantViolation(format!(
            "trace routes disagree: {} vs {} (relative {gap:.3e})",
            routes.definition, routes.reduced
        )));
    }
    Ok(routes.definition)
}
