use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rounded prefactor of the published dimension bound.
pub const ROUNDED_PREFACTOR: f64 = 0.23;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub nu: f64,
    pub g_hminus1: f64,
    pub l_used: f64,
    /// `12 L ||g||^2 / nu^4`
    pub bound_exact: f64,
    /// `0.23 ||g||^2 / nu^4`
    pub bound_rounded: f64,
    /// Root in `n` of `sqrt(n) (-nu sqrt(n) + 2 sqrt(3) L^{1/2} ||g|| / nu)`.
    pub q_root: f64,
    pub provenance: String,
}

/// Upper bound on the fractal dimension of the attractor,
/// `12 L ||g||^2_{H^-1} / nu^4`.
pub fn dimension_bound(g_hminus1: f64, nu: f64, l: f64) -> Result<BoundReport> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("nu must be positive, got {nu}")));
    }
    if !(g_hminus1 >= 0.0 && g_hminus1.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "forcing norm must be nonnegative, got {g_hminus1}"
        )));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
    }
    let scale = g_hminus1 * g_hminus1 / nu.powi(4);
    let root = 2.0 * 3f64.sqrt() * l.sqrt() * g_hminus1 / (nu * nu);
    Ok(BoundReport {
        nu,
        g_hminus1,
        l_used: l,
        bound_exact: 12.0 * l * scale,
        bound_rounded: ROUNDED_PREFACTOR * scale,
        q_root: root * root,
        provenance: format!(
            "12 * L * |g|^2 / nu^4 with L = {l:.6e}; rounded form uses 12 * L <= {ROUNDED_PREFACTOR}"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequality::constants::l_upper_4d;

    #[test]
    fn unit_parameters() {
        let r = dimension_bound(1.0, 1.0, l_upper_4d()).unwrap();
        assert!((r.bound_exact - 12.0 * 6.034 / (32.0 * std::f64::consts::PI.powi(2))).abs() < 1e-15);
        assert_eq!(r.bound_rounded, 0.23);
        assert!(r.bound_exact <= r.bound_rounded);
        assert!((r.q_root - r.bound_exact).abs() < 1e-15);
    }

    #[test]
    fn zero_forcing_and_bad_viscosity() {
        assert_eq!(dimension_bound(0.0, 0.5, l_upper_4d()).unwrap().bound_exact, 0.0);
        assert!(dimension_bound(1.0, 0.0, l_upper_4d()).is_err());
        assert!(dimension_bound(1.0, -1.0, l_upper_4d()).is_err());
    }

    #[test]
    fn scaling_in_nu() {
        let a = dimension_bound(1.0, 1.0, l_upper_4d()).unwrap();
        let b = dimension_bound(1.0, 0.5, l_upper_4d()).unwrap();
        assert!((b.bound_exact / a.bound_exact - 16.0).abs() < 1e-12);
    }
}
