use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampled scalar diagnostics of one trajectory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryLog {
    pub nu: f64,
    pub g_hminus1: f64,
    /// `||grad u(0)||^2` of the run's original initial data.
    pub initial_enstrophy: f64,
    pub times: Vec<f64>,
    /// `||grad u(t)||^2`
    pub enstrophy: Vec<f64>,
    /// `(g, u(t))_{L^2}`
    pub g_dot_u: Vec<f64>,
    /// Energy-identity residual; empty until [`TrajectoryLog::fill_residuals`].
    pub residual: Vec<f64>,
}

impl TrajectoryLog {
    pub fn new(nu: f64, g_hminus1: f64, initial_enstrophy: f64) -> Self {
        TrajectoryLog {
            nu,
            g_hminus1,
            initial_enstrophy,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub(crate) fn push(&mut self, t: f64, enstrophy: f64, g_dot_u: f64) {
        debug_assert!(self.times.last().is_none_or(|&last| t > last));
        self.times.push(t);
        self.enstrophy.push(enstrophy);
        self.g_dot_u.push(g_dot_u);
    }

    pub(crate) fn fill_residuals(&mut self) {
        self.residual = super::diagnostics::energy_residual(self, self.nu).unwrap_or_default();
    }

    /// Right-hand side of the dissipative estimate at time `t`:
    /// `||grad u0||^2 e^{-nu t} + (1 - e^{-nu t}) ||g||^2_{H^-1} / nu^2`.
    pub fn dissipative_bound(&self, t: f64) -> f64 {
        let decay = (-self.nu * t).exp();
        self.initial_enstrophy * decay + (1.0 - decay) * self.g_hminus1.powi(2) / self.nu.powi(2)
    }

    /// CSV with columns `t, enstrophy, g_dot_u, residual, bound_rhs`. Values
    /// are written in shortest round-trip form.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,enstrophy,g_dot_u,residual,bound_rhs")?;
        for i in 0..self.len() {
            let residual = self
                .residual
                .get(i)
                .map(|r| format!("{r:e}"))
                .unwrap_or_default();
            writeln!(
                out,
                "{:e},{:e},{:e},{},{:e}",
                self.times[i],
                self.enstrophy[i],
                self.g_dot_u[i],
                residual,
                self.dissipative_bound(self.times[i])
            )?;
        }
        Ok(())
    }

    /// Appends the samples of a continuation run, dropping its first sample
    /// when it repeats the last time already logged.
    pub fn extend(&mut self, other: &TrajectoryLog) -> Result<()> {
        let skip = match (self.times.last(), other.times.first()) {
            (Some(a), Some(b)) if a == b => 1,
            (Some(a), Some(b)) if b < a => {
                return Err(Error::InvalidParameter(format!(
                    "continuation starts at {b}, before the log ends at {a}"
                )))
            }
            _ => 0,
        };
        self.times.extend_from_slice(&other.times[skip..]);
        self.enstrophy.extend_from_slice(&other.enstrophy[skip..]);
        self.g_dot_u.extend_from_slice(&other.g_dot_u[skip..]);
        self.residual.clear();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut log = TrajectoryLog::new(0.5, 1.0, 2.0);
        log.push(0.0, 2.0, 0.1);
        log.push(0.5, 1.5, 0.2);
        let mut out = Vec::new();
        log.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,enstrophy,g_dot_u,residual,bound_rhs");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0e0,2e0,1e-1,,2e0"));
    }

    #[test]
    fn bound_interpolates_between_initial_and_ball() {
        let log = TrajectoryLog::new(0.5, 1.0, 10.0);
        assert_eq!(log.dissipative_bound(0.0), 10.0);
        assert!((log.dissipative_bound(1e3) - 4.0).abs() < 1e-12);
    }
}
