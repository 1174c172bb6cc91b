//! Energy, dissipativity and contraction diagnostics of trajectories.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::SolverConfig;
use super::integrate::{check_phase_space, step};
use super::log::TrajectoryLog;
use crate::error::{Error, Result};
use crate::spectral::ops::leray_project_in_place;
use crate::spectral::{
    from_physical, h1dot_inner, to_physical, PhysicalVectorField, RandomSpectrum,
    SpectralVectorField, WaveGrid,
};

/// `d/dt` of uniformly spaced samples: five-point centered differences in
/// the interior and five-point one-sided stencils at the ends, all fourth
/// order. Three or four samples fall back to second order.
pub fn uniform_derivative(values: &[f64], h: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 samples to difference, got {n}"
        )));
    }
    let f = values;
    let mut d = vec![0.0; n];
    if n < 5 {
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        for i in 1..n - 1 {
            d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        }
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        return Ok(d);
    }
    let h12 = 12.0 * h;
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / h12;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / h12;
    for i in 2..n - 2 {
        d[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / h12;
    }
    let e = n - 1;
    d[e] = (25.0 * f[e] - 48.0 * f[e - 1] + 36.0 * f[e - 2] - 16.0 * f[e - 3] + 3.0 * f[e - 4]) / h12;
    d[e - 1] = (3.0 * f[e] + 10.0 * f[e - 1] - 18.0 * f[e - 2] + 6.0 * f[e - 3] - f[e - 4]) / h12;
    Ok(d)
}

fn uniform_spacing(times: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 2 {
        return Err(Error::InvalidParameter("fewer than 2 samples".into()));
    }
    let h = (times[n - 1] - times[0]) / (n - 1) as f64;
    for w in times.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::InvalidParameter(
                "energy residual needs uniformly spaced samples".into(),
            ));
        }
    }
    Ok(h)
}

/// Residual of the energy identity at every sample:
/// `r = d/dt (||grad u||^2 / 2) + nu ||grad u||^2 - (g, u)`.
pub fn energy_residual(log: &TrajectoryLog, nu: f64) -> Result<Vec<f64>> {
    if log.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 samples, log has {}",
            log.len()
        )));
    }
    let h = uniform_spacing(&log.times)?;
    let d = uniform_derivative(&log.enstrophy, h)?;
    Ok((0..log.len())
        .map(|i| 0.5 * d[i] + nu * log.enstrophy[i] - log.g_dot_u[i])
        .collect())
}

/// Time after which `e^{-nu t} ||grad u0||^2 < eps ||g||^2 / nu^2`; zero if
/// that already holds at `t = 0`, infinite for `g = 0`.
pub fn absorbing_time(initial_enstrophy: f64, g_hminus1: f64, nu: f64, eps: f64) -> f64 {
    let ball = eps * g_hminus1.powi(2) / nu.powi(2);
    if ball <= 0.0 {
        return f64::INFINITY;
    }
    if initial_enstrophy < ball {
        return 0.0;
    }
    (initial_enstrophy / ball).ln() / nu
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipativityReport {
    pub samples: usize,
    /// Largest `(||grad u||^2 - bound) / max(1, bound)` over the samples.
    pub worst_excess: f64,
    pub violations: usize,
    /// `(1 + eps) ||g||^2 / nu^2`
    pub ball: f64,
    pub predicted_entry: f64,
    /// First sample inside the ball after which no sample leaves it.
    pub entered_at: Option<f64>,
    /// Samples outside the ball after `predicted_entry`.
    pub late_exits: usize,
}

impl DissipativityReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.late_exits == 0
    }
}

/// Checks the dissipative estimate at every sample with slack
/// `slack * max(1, bound)`, and the absorbing ball of radius
/// `(1 + eps) ||g||^2 / nu^2` once its entry time has passed.
pub fn check_dissipativity(log: &TrajectoryLog, slack: f64, eps: f64) -> DissipativityReport {
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for (t, e) in log.times.iter().zip(&log.enstrophy) {
        let bound = log.dissipative_bound(*t);
        let excess = (e - bound) / bound.max(1.0);
        worst = worst.max(excess);
        if excess > slack {
            violations += 1;
        }
    }
    let ball = (1.0 + eps) * log.g_hminus1.powi(2) / log.nu.powi(2);
    let predicted_entry = absorbing_time(log.initial_enstrophy, log.g_hminus1, log.nu, eps);
    let late_exits = log
        .times
        .iter()
        .zip(&log.enstrophy)
        .filter(|(t, e)| **t >= predicted_entry && **e > ball)
        .count();
    let mut entered_at = None;
    for (t, e) in log.times.iter().zip(&log.enstrophy).rev() {
        if *e > ball {
            break;
        }
        entered_at = Some(*t);
    }
    DissipativityReport {
        samples: log.len(),
        worst_excess: worst,
        violations,
        ball,
        predicted_entry,
        entered_at,
        late_exits,
    }
}

/// `||v||_{L^4}`, integrated exactly on the `4K+1` grid.
pub fn l4_norm(v: &SpectralVectorField) -> Result<f64> {
    let m = v.grid().exact_quadrature_points(4);
    let p = to_physical(v, m)?;
    let sq = p.magnitude_squared();
    let s: f64 = sq.values.iter().map(|x| x * x).sum();
    Ok((s * sq.cell_volume()).powf(0.25))
}

/// `||v||_{L^4} / ||grad v||`
pub fn embedding_ratio(v: &SpectralVectorField) -> Result<f64> {
    let h1 = v.h1_norm();
    if h1 == 0.0 {
        return Err(Error::InvalidParameter("probe field is zero".into()));
    }
    Ok(l4_norm(v)? / h1)
}

/// Lower estimate of the discrete embedding constant
/// `sup ||v||_{L^4} / ||grad v||` over retained solenoidal fields.
///
/// Each random probe is refined by the ascent `v <- (-Δ)^{-1} P (|v|^2 v)`,
/// which does not decrease the ratio.
pub fn measure_embedding_constant<R: Rng + ?Sized>(
    grid: &WaveGrid,
    rng: &mut R,
    probes: usize,
    ascent_steps: usize,
) -> Result<f64> {
    if probes == 0 {
        return Err(Error::InvalidParameter("need at least one probe".into()));
    }
    let slopes = [0.0, 1.0, 2.0, 3.0];
    let mut best = 0.0_f64;
    for p in 0..probes {
        let spec = RandomSpectrum {
            slope: slopes[p % slopes.len()],
            ..Default::default()
        };
        let mut v = SpectralVectorField::random(grid, rng, &spec);
        v.normalize_h1(1.0);
        best = best.max(embedding_ratio(&v)?);
        for _ in 0..ascent_steps {
            v = embedding_ascent(&v)?;
            best = best.max(embedding_ratio(&v)?);
        }
    }
    Ok(best)
}

fn embedding_ascent(v: &SpectralVectorField) -> Result<SpectralVectorField> {
    let grid = v.grid();
    let m = grid.exact_quadrature_points(4);
    let p = to_physical(v, m)?;
    let sq = p.magnitude_squared();
    let cubic = PhysicalVectorField {
        m,
        box_length: p.box_length,
        comps: std::array::from_fn(|c| {
            p.comps[c].iter().zip(&sq.values).map(|(a, s)| a * s).collect()
        }),
    };
    let mut w = from_physical(&cubic, grid)?;
    leray_project_in_place(&mut w);
    let inv = grid.inv_k2s();
    for c in w.components_mut() {
        for (z, s) in c.iter_mut().zip(inv) {
            *z *= *s;
        }
    }
    w.set_solenoidal_flag(true);
    w.normalize_h1(1.0);
    Ok(w)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub embedding_constant: f64,
    pub times: Vec<f64>,
    /// `||grad (u1 - u2)(t)||`
    pub difference: Vec<f64>,
    /// `int_0^t (C^2 ||grad u2|| - nu) ds` by the trapezoid rule.
    pub exponent: Vec<f64>,
    /// Difference over its Gronwall bound; empty when the initial data agree.
    pub ratio: Vec<f64>,
}

impl ContractionReport {
    pub fn max_ratio(&self) -> Option<f64> {
        self.ratio.iter().copied().reduce(f64::max)
    }

    pub fn max_difference(&self) -> f64 {
        self.difference.iter().copied().fold(0.0, f64::max)
    }
}

/// Co-evolves `u1` and `u2` under the same forcing and compares their
/// distance with the Gronwall bound `||grad w(0)|| exp(int (C^2 ||grad u2|| - nu))`,
/// sampling every step.
pub fn contraction_check(
    u1: &SpectralVectorField,
    u2: &SpectralVectorField,
    config: &SolverConfig,
    embedding_constant: f64,
) -> Result<ContractionReport> {
    config.validate()?;
    u1.grid().check_same(u2.grid())?;
    check_phase_space(u1)?;
    check_phase_space(u2)?;
    let g = config.forcing.build(u1.grid())?;
    let c2 = embedding_constant * embedding_constant;
    let (nu, dt) = (config.nu, config.dt);
    let rate = |u2: &SpectralVectorField| c2 * h1dot_inner(u2, u2).map(f64::sqrt).unwrap_or(f64::NAN) - nu;

    let mut report = ContractionReport {
        embedding_constant,
        ..Default::default()
    };
    let (mut a, mut b) = (u1.clone(), u2.clone());
    let w0 = a.sub(&b)?.h1_norm();
    let mut exponent = 0.0;
    let mut prev_rate = rate(&b);
    let push = |report: &mut ContractionReport, t: f64, w: f64, exponent: f64| {
        report.times.push(t);
        report.difference.push(w);
        report.exponent.push(exponent);
        if w0 > 0.0 {
            report.ratio.push(w / (w0 * exponent.exp()));
        }
    };
    push(&mut report, 0.0, w0, 0.0);
    for s in 1..=config.n_steps() {
        a = step(&a, &g, nu, dt)?;
        b = step(&b, &g, nu, dt)?;
        let r = rate(&b);
        exponent += 0.5 * dt * (prev_rate + r);
        prev_rate = r;
        push(&mut report, s as f64 * dt, a.sub(&b)?.h1_norm(), exponent);
    }
    Ok(report)
}
