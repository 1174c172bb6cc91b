//! Time-averaged n-traces along a trajectory.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::frame::{orthonormalize, TangentFrame};
use super::trace::{variational_with, ROUTE_TOL};
use crate::error::{Error, Result};
use crate::inequality::{constants, l_upper_4d, q_bound, trace_chain_nested};
use crate::solver::diagnostics::absorbing_time;
use crate::solver::integrate::{assemble_rhs, check_phase_space};
use crate::solver::SolverConfig;
use crate::spectral::ops::{leray_project_in_place, symmetric_divergence, PackedPhysical};
use crate::spectral::{h1dot_inner, hminus1_norm, RandomSpectrum, SpectralVectorField};

/// Absorbing-ball tolerance used for the default spin-up.
pub const SPIN_UP_EPS: f64 = 1e-3;

/// Settings of a trace run. `solver.t_final` is the averaging window that
/// follows the spin-up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceConfig {
    pub solver: SolverConfig,
    /// Largest frame size; every `n <= n_max` is reported.
    pub n_max: usize,
    #[serde(default = "one")]
    pub reortho_every: usize,
    /// Defaults to the absorbing-ball entry time (zero when `g = 0`).
    #[serde(default)]
    pub spin_up: Option<f64>,
    /// Route and inequality-chain checks every this many samples.
    #[serde(default = "ten")]
    pub check_every: usize,
    #[serde(default)]
    pub keep_samples: bool,
    #[serde(default)]
    pub frame_seed: u64,
}

fn one() -> usize {
    1
}

fn ten() -> usize {
    10
}

impl TraceConfig {
    pub fn new(solver: SolverConfig, n_max: usize) -> Self {
        TraceConfig {
            solver,
            n_max,
            reortho_every: 1,
            spin_up: None,
            check_every: 10,
            keep_samples: false,
            frame_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        if self.n_max == 0 {
            return Err(Error::InvalidParameter("n_max must be at least 1".into()));
        }
        if self.reortho_every == 0 || self.check_every == 0 {
            return Err(Error::InvalidParameter(
                "reortho_every and check_every must be at least 1".into(),
            ));
        }
        if let Some(s) = self.spin_up {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!("spin_up must be >= 0, got {s}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub n: usize,
    pub nu: f64,
    pub g_hminus1: f64,
    /// Length of the averaging window.
    #[serde(rename = "T")]
    pub t_window: f64,
    pub spin_up: f64,
    pub q_n: f64,
    pub bound_q_n: f64,
    pub bound_respected: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<Vec<[f64; 2]>>,
}

impl TraceReport {
    /// One CSV row per sample: `t,trace`.
    pub fn write_samples_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,trace")?;
        for [t, tr] in self.samples.iter().flatten() {
            writeln!(out, "{t:e},{tr:e}")?;
        }
        Ok(())
    }
}

/// Self-checks accumulated during a trace run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceChecks {
    pub checks: usize,
    /// Largest relative gap between the two trace routes.
    pub max_route_gap: f64,
    /// Largest Gram deviation right after orthonormalization.
    pub max_gram_deviation: f64,
    /// Samples where a link of the chain that must hold exactly failed.
    pub exact_link_failures: usize,
    /// Samples where the `rho`-bound link failed.
    pub rho_link_failures: usize,
    /// Samples where `Tr_n` exceeded its pointwise bound
    /// `-nu n + c4 ||grad u|| 2 (4L)^{1/2} sqrt(n)`.
    pub trace_bound_failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSweep {
    pub reports: Vec<TraceReport>,
    pub checks: TraceChecks,
    /// `q(n+1) < q(n)` for every `n`; logged, not required.
    pub monotone: bool,
}

/// Smallest `n` with `q(n) < 0`, or a note that no sign change occurred.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crossing {
    At(usize),
    BeyondNMax(usize),
}

/// `q(n)` values within this of zero count as not crossed.
const CROSSING_TOL: f64 = 1e-12;

pub fn dimension_crossing(reports: &[TraceReport]) -> Crossing {
    let mut sorted: Vec<&TraceReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.n);
    for r in &sorted {
        if r.q_n < -CROSSING_TOL * r.nu.max(1.0) {
            return Crossing::At(r.n);
        }
    }
    Crossing::BeyondNMax(sorted.last().map_or(0, |r| r.n))
}

/// Estimate of `q(n)` for a single `n`.
pub fn q_estimate(
    u0: &SpectralVectorField,
    solver: &SolverConfig,
    n: usize,
    reortho_every: usize,
) -> Result<TraceReport> {
    let config = TraceConfig {
        reortho_every,
        ..TraceConfig::new(solver.clone(), n)
    };
    let sweep = q_sweep(u0, &config, None)?;
    Ok(sweep.reports.into_iter().last().expect("n >= 1"))
}

/// Co-evolves the trajectory and an `n_max`-frame, then reports `q(n)` for
/// every leading subframe. Leading subframes of a Gram-Schmidt frame evolve
/// exactly as frames of their own size would, so one run serves all `n`.
pub fn q_sweep(u0: &SpectralVectorField, config: &TraceConfig, frame0: Option<TangentFrame>) -> Result<TraceSweep> {
    config.validate()?;
    check_phase_space(u0)?;
    let grid = u0.grid().clone();
    let solver = &config.solver;
    let (nu, dt) = (solver.nu, solver.dt);
    let g = solver.forcing.build(&grid)?;
    let g_norm = hminus1_norm(&g)?;
    let l = l_upper_4d();
    let c4 = constants(4)?.c_d.value;

    let spin_up = match config.spin_up {
        Some(s) => s,
        None => {
            let t = absorbing_time(h1dot_inner(u0, u0)?, g_norm, nu, SPIN_UP_EPS);
            if t.is_finite() {
                t
            } else {
                0.0
            }
        }
    };
    let spin_steps = (spin_up / dt).round() as u64;
    let avg_steps = solver.n_steps();
    let total = spin_steps + avg_steps;
    let n_max = config.n_max;

    let frame = match frame0 {
        Some(f) => {
            if f.len() != n_max {
                return Err(Error::InvalidParameter(format!(
                    "initial frame has {} fields, n_max is {n_max}",
                    f.len()
                )));
            }
            orthonormalize(&f)?
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.frame_seed);
            TangentFrame::random(&grid, n_max, &mut rng, &RandomSpectrum::default())?
        }
    };

    let mut u = u0.clone();
    let mut vs = frame.into_fields();
    let mut checks = TraceChecks::default();
    let mut times = Vec::new();
    let mut traces: Vec<Vec<f64>> = vec![Vec::new(); n_max];
    let mut sample_index = 0usize;

    for s in 0..=total {
        let orthonormal = s % config.reortho_every as u64 == 0;
        let t = s as f64 * dt;
        let pu = PackedPhysical::from_field(&u);
        let k1_u = assemble_rhs(&u, Some(&g), &nonlinear_from(&u, &pu), nu);
        let k1_v: Vec<SpectralVectorField> =
            vs.iter().map(|v| variational_with(&pu, v, nu)).collect::<Result<_>>()?;

        if orthonormal && s >= spin_steps {
            times.push(t);
            let mut acc = 0.0;
            for (i, (kv, v)) in k1_v.iter().zip(&vs).enumerate() {
                acc += h1dot_inner(kv, v)?;
                traces[i].push(acc);
            }
            if sample_index % config.check_every == 0 {
                let frame = TangentFrame::new(vs.clone())?;
                run_checks(&u, &frame, nu, c4, l, &traces, &mut checks)?;
            }
            sample_index += 1;
        }
        if s == total {
            break;
        }

        // Remaining RK4 stages of the joint system.
        let stage = |a: f64, ku: &SpectralVectorField, kv: &[SpectralVectorField]| -> Result<_> {
            let us = SpectralVectorField::lincomb(1.0, &u, a * dt, ku)?;
            let vst: Vec<SpectralVectorField> = vs
                .iter()
                .zip(kv)
                .map(|(v, k)| SpectralVectorField::lincomb(1.0, v, a * dt, k))
                .collect::<Result<_>>()?;
            let pu = PackedPhysical::from_field(&us);
            let du = assemble_rhs(&us, Some(&g), &nonlinear_from(&us, &pu), nu);
            let dv: Vec<SpectralVectorField> =
                vst.iter().map(|v| variational_with(&pu, v, nu)).collect::<Result<_>>()?;
            Ok((du, dv))
        };
        let (k2_u, k2_v) = stage(0.5, &k1_u, &k1_v)?;
        let (k3_u, k3_v) = stage(0.5, &k2_u, &k2_v)?;
        let (k4_u, k4_v) = stage(1.0, &k3_u, &k3_v)?;
        let combine = |y: &SpectralVectorField, k: [&SpectralVectorField; 4]| -> Result<SpectralVectorField> {
            let mut next = y.clone();
            next.axpy(dt / 6.0, k[0])?;
            next.axpy(dt / 3.0, k[1])?;
            next.axpy(dt / 3.0, k[2])?;
            next.axpy(dt / 6.0, k[3])?;
            leray_project_in_place(&mut next);
            Ok(next)
        };
        let next_u = combine(&u, [&k1_u, &k2_u, &k3_u, &k4_u])?;
        let mut next_vs = Vec::with_capacity(n_max);
        for i in 0..n_max {
            next_vs.push(combine(&vs[i], [&k1_v[i], &k2_v[i], &k3_v[i], &k4_v[i]])?);
        }
        if !next_u.is_finite() || next_vs.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                time: t + dt,
                detail: "non-finite state in trace run".into(),
            });
        }
        u = next_u;
        vs = next_vs;
        if (s + 1) % config.reortho_every as u64 == 0 {
            let frame = orthonormalize(&TangentFrame::new(vs)?)?;
            checks.max_gram_deviation = checks.max_gram_deviation.max(frame.gram_deviation()?);
            vs = frame.into_fields();
        }
    }

    let t_window = avg_steps as f64 * dt;
    let reports: Vec<TraceReport> = (0..n_max)
        .map(|i| {
            let n = i + 1;
            let q_n = trapezoid_mean(&times, &traces[i]);
            let bound_q_n = q_bound(n, nu, g_norm, l);
            TraceReport {
                n,
                nu,
                g_hminus1: g_norm,
                t_window,
                spin_up: spin_steps as f64 * dt,
                q_n,
                bound_q_n,
                bound_respected: q_n <= bound_q_n + 1e-8 * bound_q_n.abs().max(1.0),
                samples: config
                    .keep_samples
                    .then(|| times.iter().zip(&traces[i]).map(|(t, v)| [*t, *v]).collect()),
            }
        })
        .collect();
    let monotone = reports.windows(2).all(|w| w[1].q_n < w[0].q_n);
    Ok(TraceSweep {
        reports,
        checks,
        monotone,
    })
}

fn nonlinear_from(u: &SpectralVectorField, pu: &PackedPhysical) -> SpectralVectorField {
    let coeffs = symmetric_divergence(u.grid(), pu, None);
    SpectralVectorField::from_parts(u.grid(), coeffs, false)
}

fn run_checks(
    u: &SpectralVectorField,
    frame: &TangentFrame,
    nu: f64,
    c4: f64,
    l: f64,
    traces: &[Vec<f64>],
    checks: &mut TraceChecks,
) -> Result<()> {
    checks.checks += 1;
    let chain = trace_chain_nested(u, frame, c4, l)?;
    for (i, link) in chain.iter().enumerate() {
        let n = i + 1;
        let definition = *traces[i].last().expect("sample recorded");
        let reduced = -nu * n as f64 - link.advection;
        let scale = definition.abs().max(reduced.abs());
        let gap = if scale == 0.0 {
            0.0
        } else {
            (definition - reduced).abs() / scale
        };
        checks.max_route_gap = checks.max_route_gap.max(gap);
        if !link.exact_links_hold() {
            checks.exact_link_failures += 1;
        }
        if !link.rho_link_holds() {
            checks.rho_link_failures += 1;
        }
        if definition > -nu * n as f64 + link.rho_form * (1.0 + 1e-12) {
            checks.trace_bound_failures += 1;
        }
    }
    if checks.max_route_gap > ROUTE_TOL {
        return Err(Error::InvariantViolation(format!(
            "trace routes disagree by {:.3e}",
            checks.max_route_gap
        )));
    }
    Ok(())
}

/// `(1/T) int f dt` by the trapezoid rule; a single sample is its own mean.
fn trapezoid_mean(t: &[f64], f: &[f64]) -> f64 {
    match t.len() {
        0 => f64::NAN,
        1 => f[0],
        n => {
            let mut acc = 0.0;
            for i in 1..n {
                acc += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
            }
            acc / (t[n - 1] - t[0])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ForcingSpec;
    use crate::spectral::WaveGrid;
    use std::f64::consts::PI;

    #[test]
    fn trapezoid_of_linear_function() {
        let t = [0.0, 0.5, 1.0, 2.0];
        let f = t.map(|x| 3.0 * x + 1.0);
        assert!((trapezoid_mean(&t, &f) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn crossing_rules() {
        let mk = |n, q| TraceReport {
            n,
            nu: 1.0,
            g_hminus1: 1.0,
            t_window: 1.0,
            spin_up: 0.0,
            q_n: q,
            bound_q_n: 0.0,
            bound_respected: true,
            samples: None,
        };
        assert_eq!(dimension_crossing(&[mk(2, -0.1), mk(1, 0.3)]), Crossing::At(2));
        assert_eq!(dimension_crossing(&[mk(1, 0.0), mk(2, 0.1)]), Crossing::BeyondNMax(2));
    }

    #[test]
    fn unforced_zero_state_gives_viscous_traces() {
        let grid = WaveGrid::new(8, 2.0 * PI).unwrap();
        let solver = SolverConfig {
            nu: 0.5,
            dt: 0.05,
            t_final: 0.5,
            forcing: ForcingSpec::Zero,
            save_every: 1,
        };
        let config = TraceConfig {
            keep_samples: true,
            check_every: 1,
            ..TraceConfig::new(solver, 3)
        };
        let sweep = q_sweep(&SpectralVectorField::zeros(&grid), &config, None).unwrap();
        for r in &sweep.reports {
            assert!((r.q_n + 0.5 * r.n as f64).abs() < 1e-12, "{r:?}");
            assert!(r.bound_respected);
            assert_eq!(r.samples.as_ref().unwrap().len(), 11);
        }
        assert!(sweep.monotone);
        assert_eq!(dimension_crossing(&sweep.reports), Crossing::At(1));
        assert_eq!(sweep.checks.exact_link_failures, 0);
        assert!(sweep.checks.max_gram_deviation <= 1e-10);
    }

    #[test]
    fn single_n_estimate_matches_sweep_head() {
        let grid = WaveGrid::new(8, 2.0 * PI).unwrap();
        let mut u0 = SpectralVectorField::shear(&grid, 0.7, 0, 1);
        u0.axpy(1.0, &SpectralVectorField::shear(&grid, 0.4, 2, 3)).unwrap();
        let solver = SolverConfig {
            nu: 0.5,
            dt: 0.05,
            t_final: 0.5,
            forcing: ForcingSpec::Zero,
            save_every: 1,
        };
        let sweep = q_sweep(
            &u0,
            &TraceConfig {
                spin_up: Some(0.0),
                ..TraceConfig::new(solver.clone(), 3)
            },
            None,
        )
        .unwrap();
        let mut single_cfg = TraceConfig::new(solver, 1);
        single_cfg.spin_up = Some(0.0);
        let single = q_sweep(&u0, &single_cfg, None).unwrap();
        assert!((single.reports[0].q_n - sweep.reports[0].q_n).abs() <= 1e-12);
    }
}
