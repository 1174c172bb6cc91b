use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::spectral::{hminus1_norm, io, leray_project, RandomSpectrum, SpectralVectorField, WaveGrid};

/// One Fourier mode of the forcing: `amplitude * exp(i k.x) + c.c.`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForcingMode {
    pub k: [i64; 4],
    /// `[re, im]` per component.
    pub amplitude: [[f64; 2]; 4],
}

/// Where the body force `g` comes from. Every variant is Leray-projected,
/// stripped of its mean and truncated to the dealiased modes on load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ForcingSpec {
    Zero,
    Modes { modes: Vec<ForcingMode> },
    File { path: PathBuf },
    /// Seeded random solenoidal field on `|k| <= k_max`, rescaled to the
    /// prescribed `||g||_{H^-1}`.
    RandomLowMode { k_max: f64, hminus1_norm: f64, seed: u64 },
}

impl Default for ForcingSpec {
    fn default() -> Self {
        ForcingSpec::RandomLowMode {
            k_max: 2.0,
            hminus1_norm: 1.0,
            seed: 0,
        }
    }
}

impl ForcingSpec {
    /// Forcing that holds the shear `u* = (A sin x_2, 0, 0, 0)` steady:
    /// `g = nu A sin(x_2) e_1`.
    pub fn steady_shear(nu: f64, amplitude: f64) -> Self {
        ForcingSpec::Modes {
            modes: vec![ForcingMode {
                k: [0, 1, 0, 0],
                amplitude: [[0.0, -nu * amplitude / 2.0], [0.0; 2], [0.0; 2], [0.0; 2]],
            }],
        }
    }

    pub fn build(&self, grid: &WaveGrid) -> Result<SpectralVectorField> {
        let raw = match self {
            ForcingSpec::Zero => SpectralVectorField::zeros(grid),
            ForcingSpec::Modes { modes } => {
                let mut g = SpectralVectorField::zeros(grid);
                for m in modes {
                    let amp = m.amplitude.map(|[re, im]| Complex64::new(re, im));
                    g.set_mode(m.k, amp);
                }
                g
            }
            ForcingSpec::File { path } => io::load_field(path, Some(grid))?,
            ForcingSpec::RandomLowMode {
                k_max,
                hminus1_norm: target,
                seed,
            } => {
                if !(*target >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "forcing norm must be nonnegative, got {target}"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let spec = RandomSpectrum {
                    k_max: *k_max,
                    slope: 0.0,
                    retained_only: true,
                    solenoidal: true,
                };
                let mut g = SpectralVectorField::random(grid, &mut rng, &spec);
                let norm = hminus1_norm(&g)?;
                if norm > 0.0 {
                    g.scale(target / norm);
                }
                g
            }
        };
        let mut g = raw;
        g.apply_mask();
        Ok(leray_project(&g))
    }
}

/// Parameters of a single run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nu: f64,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default)]
    pub forcing: ForcingSpec,
    #[serde(default = "one")]
    pub save_every: usize,
}

fn one() -> usize {
    1
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            nu: 0.5,
            dt: 1e-2,
            t_final: 10.0,
            forcing: ForcingSpec::default(),
            save_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        positive("nu", self.nu)?;
        positive("dt", self.dt)?;
        positive("t_final", self.t_final)?;
        if self.t_final < self.dt {
            return Err(Error::InvalidParameter(format!(
                "t_final ({}) is shorter than dt ({})",
                self.t_final, self.dt
            )));
        }
        if self.save_every == 0 {
            return Err(Error::InvalidParameter("save_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps of size `dt` that reach `t_final` (rounded).
    pub fn n_steps(&self) -> u64 {
        (self.t_final / self.dt).round().max(1.0) as u64
    }

    /// `dt` beyond `1/(2 nu)` is allowed but worth a warning.
    pub fn exceeds_stability_margin(&self) -> bool {
        self.dt >= 1.0 / (2.0 * self.nu)
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        hash_json(self)
    }
}

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn hash_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}
