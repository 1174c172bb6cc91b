use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::spectral::io::{load_field, save_field};
use crate::spectral::{SpectralVectorField, WaveGrid};

/// JSON sidecar stored next to a checkpointed field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub t: f64,
    pub step: u64,
    pub config_hash: String,
    pub seed: Option<u64>,
    /// Enstrophy of the run's initial data, needed to continue the
    /// dissipative bound after a restart.
    pub initial_enstrophy: f64,
}

pub fn sidecar_path(field_path: &Path) -> PathBuf {
    field_path.with_extension("json")
}

pub fn save(path: &Path, u: &SpectralVectorField, meta: &CheckpointMeta) -> Result<()> {
    save_field(u, path)?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(())
}

pub fn load(path: &Path, grid: Option<&WaveGrid>) -> Result<(SpectralVectorField, CheckpointMeta)> {
    let mut u = load_field(path, grid)?;
    u.refresh_solenoidal_flag();
    let meta: CheckpointMeta = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    Ok((u, meta))
}
