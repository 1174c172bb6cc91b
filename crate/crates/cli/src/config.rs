use std::path::{Path, PathBuf};

use nsv4_core::inequality::{l_upper_4d, ClrSpec};
use nsv4_core::solver::hash_json;
use nsv4_core::{ForcingSpec, SolverConfig, WaveGrid};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub n: usize,
    pub box_length: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        GridSettings {
            n: 8,
            box_length: 2.0 * std::f64::consts::PI,
        }
    }
}

/// Solver parameters; `t_final` falls back to a per-command default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub nu: f64,
    pub dt: f64,
    pub t_final: Option<f64>,
    pub save_every: usize,
    pub forcing: ForcingSpec,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSettings {
            nu: d.nu,
            dt: d.dt,
            t_final: None,
            save_every: d.save_every,
            forcing: d.forcing,
        }
    }
}

/// Initial condition: a seeded random field with prescribed `||grad u0||`,
/// or a field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSettings {
    pub h1_norm: f64,
    /// Spectral slope of the random draw.
    pub slope: f64,
    pub file: Option<PathBuf>,
}

impl Default for InitialSettings {
    fn default() -> Self {
        InitialSettings {
            h1_norm: 5.0,
            slope: 1.0,
            file: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSettings {
    pub n_min: usize,
    pub n_max: usize,
    pub spin_up: Option<f64>,
    pub reortho_every: usize,
    pub check_every: usize,
    pub keep_samples: bool,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            n_min: 1,
            n_max: 8,
            spin_up: None,
            reortho_every: 1,
            check_every: 10,
            keep_samples: false,
        }
    }
}

/// Parameters of the verification subcommands.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckSettings {
    /// Monte-Carlo trials (contraction pairs, rho frames).
    pub trials: usize,
    /// `||grad (u1 - u2)(0)||` of contraction pairs.
    pub perturbation: f64,
    pub embedding_probes: usize,
    pub embedding_ascent: usize,
    /// Shear amplitude `A` of the steady test.
    pub shear_amplitude: f64,
    pub decay_tolerance: f64,
    pub steady_tolerance: f64,
    pub rhs_tolerance: f64,
    pub contraction_tolerance: f64,
}

impl Default for CheckSettings {
    fn default() -> Self {
        CheckSettings {
            trials: 10,
            perturbation: 1e-4,
            embedding_probes: 8,
            embedding_ascent: 20,
            shear_amplitude: 1.0,
            decay_tolerance: 1e-6,
            steady_tolerance: 1e-8,
            rhs_tolerance: 1e-12,
            contraction_tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundSettings {
    /// `||g||_{H^-1}`; defaults to the norm of the configured forcing.
    pub g_norm: Option<f64>,
    /// CLR constant used by every bound.
    pub l_const: f64,
}

impl Default for BoundSettings {
    fn default() -> Self {
        BoundSettings {
            g_norm: None,
            l_const: l_upper_4d(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClrSettings {
    /// A single potential; the built-in deep-well family when absent.
    pub potential: Option<ClrSpec>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub format: Format,
    /// Checkpoint cadence of `simulate`, in steps; final state only when absent.
    pub checkpoint_every: Option<u64>,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            dir: PathBuf::from("runs"),
            format: Format::Json,
            checkpoint_every: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSettings,
    pub solver: SolverSettings,
    pub initial: InitialSettings,
    pub trace: TraceSettings,
    pub checks: CheckSettings,
    pub bound: BoundSettings,
    pub clr: ClrSettings,
    /// Where and how results are written; kept out of reports and hashes.
    #[serde(skip_serializing)]
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn grid(&self) -> Result<WaveGrid, CliError> {
        Ok(WaveGrid::new(self.grid.n, self.grid.box_length)?)
    }

    pub fn solver(&self, default_t_final: f64) -> SolverConfig {
        SolverConfig {
            nu: self.solver.nu,
            dt: self.solver.dt,
            t_final: self.solver.t_final.unwrap_or(default_t_final),
            forcing: self.solver.forcing.clone(),
            save_every: self.solver.save_every,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("solver.nu", self.solver.nu)?;
        positive("solver.dt", self.solver.dt)?;
        if let Some(t) = self.solver.t_final {
            positive("solver.t_final", t)?;
        }
        positive("grid.box_length", self.grid.box_length)?;
        positive("bound.l_const", self.bound.l_const)?;
        positive("checks.perturbation", self.checks.perturbation)?;
        positive("checks.shear_amplitude", self.checks.shear_amplitude)?;
        if self.initial.h1_norm < 0.0 || !self.initial.h1_norm.is_finite() {
            return Err(CliError::Config(format!(
                "initial.h1_norm must be nonnegative, got {}",
                self.initial.h1_norm
            )));
        }
        if self.trace.n_min == 0 || self.trace.n_min > self.trace.n_max {
            return Err(CliError::Config(format!(
                "trace range {}..={} is empty or starts at 0",
                self.trace.n_min, self.trace.n_max
            )));
        }
        if self.checks.trials == 0 {
            return Err(CliError::Config("checks.trials must be at least 1".into()));
        }
        Ok(())
    }

    /// Hash of everything that affects results; the output settings do not.
    pub fn hash(&self, command: &str) -> String {
        hash_json(&(command, self))
    }
}
