use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ratio of Lieb's bound on the CLR constant to the semiclassical constant.
/// Only the four-dimensional value is recorded.
fn lieb_multiplier(d: u32) -> Option<(f64, &'static str)> {
    match d {
        4 => Some((6.034, "Lieb, d = 4")),
        _ => None,
    }
}

/// A constant together with where its value comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantTable {
    pub d: u32,
    /// `sqrt((d-1)/d)`: `(A v, v) <= c_d |A| |v|^2` for trace-free `A`.
    pub c_d: Constant,
    /// Semiclassical constant `omega_d / (2 pi)^d`.
    pub l_cl: Constant,
    /// Best recorded upper bound on the CLR constant `L_{0,d}`.
    pub l_upper: Option<Constant>,
}

/// `Gamma(x)` for `x` a positive integer or half-integer.
pub fn gamma_half_integer(x: f64) -> Result<f64> {
    let twice = 2.0 * x;
    if !(x > 0.0) || twice.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma_half_integer needs a positive (half-)integer, got {x}"
        )));
    }
    let (mut value, mut y) = if twice as u64 % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while y < x {
        value *= y;
        y += 1.0;
    }
    Ok(value)
}

/// Volume of the unit ball in `R^d`, `pi^{d/2} / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: u32) -> Result<f64> {
    Ok(PI.powf(d as f64 / 2.0) / gamma_half_integer(d as f64 / 2.0 + 1.0)?)
}

pub fn constants(d: u32) -> Result<ConstantTable> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "the orthonormal-gradient bound needs d >= 3, got {d}"
        )));
    }
    let c_d = ((d as f64 - 1.0) / d as f64).sqrt();
    let l_cl = unit_ball_volume(d)? / (2.0 * PI).powi(d as i32);
    let l_upper = lieb_multiplier(d).map(|(mult, source)| Constant {
        value: mult * l_cl,
        provenance: format!(
            "{mult} * L_cl ({source}); L_cl alone is the smaller value {l_cl:.4e}"
        ),
    });
    Ok(ConstantTable {
        d,
        c_d: Constant {
            value: c_d,
            provenance: "sqrt((d-1)/d), largest eigenvalue of a trace-free symmetric matrix of unit Frobenius norm".into(),
        },
        l_cl: Constant {
            value: l_cl,
            provenance: "omega_d / (2 pi)^d with omega_d = pi^(d/2) / Gamma(d/2 + 1)".into(),
        },
        l_upper,
    })
}

/// `L_upper` for `d = 4`, the value used by default in every bound.
pub fn l_upper_4d() -> f64 {
    6.034 / (32.0 * PI * PI)
}

/// Right side of the `L^2` bound on `rho` for `n` orthonormal gradients in
/// `d = 4`: `2 (4 L)^{1/2} n^{1/2}`.
pub fn rho_bound(n: usize, l: f64) -> f64 {
    2.0 * (4.0 * l).sqrt() * (n as f64).sqrt()
}

/// Upper bound on `q(n)`: `sqrt(n) (-nu sqrt(n) + 2 sqrt(3) L^{1/2} ||g|| / nu)`.
pub fn q_bound(n: usize, nu: f64, g_hminus1: f64, l: f64) -> f64 {
    let s = (n as f64).sqrt();
    s * (-nu * s + 2.0 * 3f64.sqrt() * l.sqrt() * g_hminus1 / nu)
}
