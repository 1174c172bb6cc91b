//! The projected Voigt system as an ODE on the Fourier coefficients:
//!
//! ```text
//! du/dt = -nu u + (-Δ)^{-1} P (g - (u . grad) u)
//! ```
//!
//! The inverse Laplacian makes the right-hand side a bounded operator, so
//! classical explicit RK4 is used throughout.

use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;

use super::checkpoint::{self, CheckpointMeta};
use super::config::SolverConfig;
use super::log::TrajectoryLog;
use crate::error::{Error, Result};
use crate::spectral::ops::leray_project_in_place;
use crate::spectral::{h1dot_inner, hminus1_norm, nonlinear_term, SpectralVectorField, WaveGrid};

/// `du/dt` at `u`: `-nu u(k) + |k|^-2 P_k [g(k) - N(u)(k)]` on retained
/// modes, `-nu u(k)` elsewhere.
pub fn rhs(u: &SpectralVectorField, g: &SpectralVectorField, nu: f64) -> Result<SpectralVectorField> {
    u.grid().check_same(g.grid())?;
    g.check_solenoidal()?;
    let n = nonlinear_term(u)?;
    Ok(assemble_rhs(u, Some(g), &n, nu))
}

pub(crate) fn assemble_rhs(
    u: &SpectralVectorField,
    g: Option<&SpectralVectorField>,
    nonlinear: &SpectralVectorField,
    nu: f64,
) -> SpectralVectorField {
    let grid = u.grid();
    let mut out = u.scaled(-nu);
    let kap = grid.kappas();
    let inv = grid.inv_k2s();
    let [o0, o1, o2, o3] = out.components_mut();
    for &site in grid.retained_sites() {
        let f: [Complex64; 4] = std::array::from_fn(|c| {
            let gc = g.map_or(Complex64::new(0.0, 0.0), |g| g.component(c)[site]);
            gc - nonlinear.component(c)[site]
        });
        let k = kap[site];
        let d = (f[0] * k[0] + f[1] * k[1] + f[2] * k[2] + f[3] * k[3]) * inv[site];
        let w = inv[site];
        o0[site] += (f[0] - d * k[0]) * w;
        o1[site] += (f[1] - d * k[1]) * w;
        o2[site] += (f[2] - d * k[2]) * w;
        o3[site] += (f[3] - d * k[3]) * w;
    }
    out.set_solenoidal_flag(true);
    out
}

/// Generic classical RK4 step for `dy/dt = f(y)` on solenoidal fields; the
/// result is Leray-projected.
pub(crate) fn rk4<F>(y: &SpectralVectorField, dt: f64, mut f: F) -> Result<SpectralVectorField>
where
    F: FnMut(&SpectralVectorField, usize) -> Result<SpectralVectorField>,
{
    let k1 = f(y, 0)?;
    let k2 = f(&SpectralVectorField::lincomb(1.0, y, 0.5 * dt, &k1)?, 1)?;
    let k3 = f(&SpectralVectorField::lincomb(1.0, y, 0.5 * dt, &k2)?, 2)?;
    let k4 = f(&SpectralVectorField::lincomb(1.0, y, dt, &k3)?, 3)?;
    let mut next = y.clone();
    next.axpy(dt / 6.0, &k1)?;
    next.axpy(dt / 3.0, &k2)?;
    next.axpy(dt / 3.0, &k3)?;
    next.axpy(dt / 6.0, &k4)?;
    leray_project_in_place(&mut next);
    Ok(next)
}

/// One RK4 step of size `dt`.
pub fn step(u: &SpectralVectorField, g: &SpectralVectorField, nu: f64, dt: f64) -> Result<SpectralVectorField> {
    let next = rk4(u, dt, |y, _| rhs(y, g, nu))?;
    if !next.is_finite() {
        return Err(Error::BlowUp {
            time: f64::NAN,
            detail: "non-finite coefficients after RK4 step".into(),
        });
    }
    Ok(next)
}

/// A run in progress: state, forcing and log.
pub struct Simulation {
    config: SolverConfig,
    g: SpectralVectorField,
    g_hminus1: f64,
    u: SpectralVectorField,
    step: u64,
    initial_enstrophy: f64,
    log: TrajectoryLog,
}

impl Simulation {
    pub fn new(u0: &SpectralVectorField, config: &SolverConfig) -> Result<Self> {
        config.validate()?;
        check_phase_space(u0)?;
        let g = config.forcing.build(u0.grid())?;
        let g_hminus1 = hminus1_norm(&g)?;
        let initial_enstrophy = h1dot_inner(u0, u0)?;
        let mut sim = Simulation {
            config: config.clone(),
            g,
            g_hminus1,
            u: u0.clone(),
            step: 0,
            initial_enstrophy,
            log: TrajectoryLog::new(config.nu, g_hminus1, initial_enstrophy),
        };
        sim.record()?;
        Ok(sim)
    }

    /// Continues a run from a checkpoint written by [`Simulation::save_checkpoint`].
    pub fn resume(path: &Path, config: &SolverConfig, grid: Option<&WaveGrid>) -> Result<Self> {
        let (u, meta) = checkpoint::load(path, grid)?;
        if meta.config_hash != config.hash() {
            return Err(Error::InvalidParameter(format!(
                "checkpoint {} was written by a different configuration",
                path.display()
            )));
        }
        config.validate()?;
        let g = config.forcing.build(u.grid())?;
        let g_hminus1 = hminus1_norm(&g)?;
        let mut sim = Simulation {
            config: config.clone(),
            g,
            g_hminus1,
            u,
            step: meta.step,
            initial_enstrophy: meta.initial_enstrophy,
            log: TrajectoryLog::new(config.nu, g_hminus1, meta.initial_enstrophy),
        };
        sim.record()?;
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    pub fn state(&self) -> &SpectralVectorField {
        &self.u
    }

    pub fn forcing(&self) -> &SpectralVectorField {
        &self.g
    }

    pub fn forcing_hminus1(&self) -> f64 {
        self.g_hminus1
    }

    pub fn log(&self) -> &TrajectoryLog {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.step >= self.config.n_steps()
    }

    /// Advances by up to `steps` steps, stopping at `t_final`.
    pub fn advance(&mut self, steps: u64) -> Result<()> {
        let end = self.step.saturating_add(steps).min(self.config.n_steps());
        while self.step < end {
            let next = step(&self.u, &self.g, self.config.nu, self.config.dt).map_err(|e| match e {
                Error::BlowUp { detail, .. } => Error::BlowUp {
                    time: self.time(),
                    detail,
                },
                other => other,
            })?;
            self.u = next;
            self.step += 1;
            if self.step % self.config.save_every as u64 == 0 || self.step == self.config.n_steps() {
                self.record()?;
            }
        }
        Ok(())
    }

    fn record(&mut self) -> Result<()> {
        let t = self.time();
        let enstrophy = h1dot_inner(&self.u, &self.u)?;
        let g_dot_u = self.g.l2_inner(&self.u)?;
        self.log.push(t, enstrophy, g_dot_u);
        Ok(())
    }

    /// Writes `<dir>/checkpoint_<step>.nsv4` plus its JSON sidecar.
    pub fn save_checkpoint(&self, dir: &Path, seed: Option<u64>) -> Result<PathBuf> {
        let meta = CheckpointMeta {
            t: self.time(),
            step: self.step,
            config_hash: self.config.hash(),
            seed,
            initial_enstrophy: self.initial_enstrophy,
        };
        let path = dir.join(format!("checkpoint_{:08}.nsv4", self.step));
        checkpoint::save(&path, &self.u, &meta)?;
        Ok(path)
    }

    /// Runs to `t_final` and returns the log with energy residuals filled in.
    pub fn run(mut self) -> Result<TrajectoryLog> {
        self.advance(u64::MAX)?;
        Ok(self.finish())
    }

    pub fn finish(mut self) -> TrajectoryLog {
        self.log.fill_residuals();
        self.log
    }

    pub fn into_state(self) -> SpectralVectorField {
        self.u
    }
}

/// Advances `u0` to `config.t_final`, logging at every `save_every` steps.
pub fn simulate(u0: &SpectralVectorField, config: &SolverConfig) -> Result<TrajectoryLog> {
    Simulation::new(u0, config)?.run()
}

pub(crate) fn check_phase_space(u: &SpectralVectorField) -> Result<()> {
    let mean = u.mean_mode_norm();
    if mean != 0.0 {
        return Err(Error::NonzeroMean(mean));
    }
    u.check_solenoidal()?;
    if !u.is_finite() {
        return Err(Error::InvalidParameter("initial data is not finite".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::config::ForcingSpec;
    use crate::spectral::{leray_project, RandomSpectrum};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid8() -> WaveGrid {
        WaveGrid::new(8, 2.0 * PI).unwrap()
    }

    #[test]
    fn linear_case_is_inverse_laplacian_of_forcing() {
        let grid = grid8();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = SpectralVectorField::random(&grid, &mut rng, &RandomSpectrum::default());
        let r = rhs(&SpectralVectorField::zeros(&grid), &g, 0.5).unwrap();
        for c in 0..4 {
            for site in 0..grid.len() {
                let expect = g.component(c)[site] * grid.inv_k2(site);
                assert!((r.component(c)[site] - expect).norm() <= 1e-15);
            }
        }
    }

    #[test]
    fn steady_shear_is_a_fixed_point() {
        let grid = grid8();
        let nu = 0.5;
        let u = SpectralVectorField::shear(&grid, 1.0, 0, 1);
        let g = ForcingSpec::steady_shear(nu, 1.0).build(&grid).unwrap();
        let r = rhs(&u, &g, nu).unwrap();
        assert!(r.max_abs() <= 1e-12 * u.max_abs());
        let next = step(&u, &g, nu, 0.01).unwrap();
        let d = next.sub(&u).unwrap();
        assert!(d.h1_norm() <= 1e-12 * u.h1_norm());
    }

    #[test]
    fn unforced_single_mode_matches_definition() {
        let grid = grid8();
        let u = SpectralVectorField::shear(&grid, 0.3, 2, 1);
        let zero = SpectralVectorField::zeros(&grid);
        let r = rhs(&u, &zero, 0.7).unwrap();
        let n = nonlinear_term(&u).unwrap();
        let mut expect = u.scaled(-0.7);
        let pn = leray_project(&n);
        for c in 0..4 {
            for site in 0..grid.len() {
                expect.component_mut(c)[site] -= pn.component(c)[site] * grid.inv_k2(site);
            }
        }
        assert!(r.sub(&expect).unwrap().max_abs() <= 1e-15);
    }

    #[test]
    fn step_output_is_projected() {
        let grid = grid8();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut u = SpectralVectorField::random(&grid, &mut rng, &RandomSpectrum::default());
        u.normalize_h1(5.0);
        let g = ForcingSpec::default().build(&grid).unwrap();
        let next = step(&u, &g, 0.5, 0.01).unwrap();
        let again = leray_project(&next);
        assert!(again.sub(&next).unwrap().max_abs() <= 1e-12 * next.max_abs());
        assert!(next.divergence_defect() <= 1e-12);
        assert_eq!(next.hermitian_defect(), 0.0);
        assert_eq!(next.mean_mode_norm(), 0.0);
    }

    #[test]
    fn blow_up_is_reported() {
        let grid = grid8();
        let mut u = SpectralVectorField::shear(&grid, 1.0, 0, 1);
        u.component_mut(0)[grid.site([0, 1, 0, 0])] = Complex64::new(f64::NAN, 0.0);
        u.set_solenoidal_flag(true);
        let zero = SpectralVectorField::zeros(&grid);
        assert!(matches!(step(&u, &zero, 0.5, 0.01), Err(Error::BlowUp { .. })));
    }
}
