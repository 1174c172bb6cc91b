//! Time integration of the projected Voigt system and its trajectory
//! diagnostics.

pub mod checkpoint;
pub mod config;
pub mod diagnostics;
pub mod integrate;
pub mod log;

pub use checkpoint::CheckpointMeta;
pub use config::{hash_json, ForcingMode, ForcingSpec, SolverConfig};
pub use diagnostics::{
    absorbing_time, check_dissipativity, contraction_check, embedding_ratio, energy_residual,
    l4_norm, measure_embedding_constant, ContractionReport, DissipativityReport,
};
pub use integrate::{rhs, simulate, step, Simulation};
pub use log::TrajectoryLog;
