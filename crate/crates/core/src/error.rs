use thiserror::Error;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids ({left} vs {right})")]
    GridMismatch { left: String, right: String },

    #[error("field is not solenoidal (relative divergence {defect:.3e} exceeds {tolerance:.1e})")]
    NotSolenoidal { defect: f64, tolerance: f64 },

    #[error("field has a nonzero mean mode (|u(0)| = {0:.3e})")]
    NonzeroMean(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("solution blew up at t = {time}: {detail}")]
    BlowUp { time: f64, detail: String },

    #[error("frame is rank deficient at vector {index} (residual norm {residual:.3e})")]
    RankDeficient { index: usize, residual: f64 },

    #[error("frame is not orthonormal (max Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("{0}")]
    Unsupported(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
