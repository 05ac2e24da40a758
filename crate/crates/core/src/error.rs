use thiserror::Error;

/// Crate-wide error type.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch between operands: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("convergence estimate needs at least 3 resolutions, got {0}")]
    TooFewResolutions(usize),

    #[error("time step {dt} exceeds stability guard {max} (safety * m * dx^2 / hbar)")]
    TimeStepTooLarge { dt: f64, max: f64 },

    #[error("calibration failed: best discrepancy {best:.3e} exceeds tolerance {tol:.3e}")]
    CalibrationFailed { best: f64, tol: f64 },

    #[error("evolution became non-finite at t = {time:.6}")]
    Unstable { time: f64 },

    #[error("streamline left the valid region at arc length {s:.6}")]
    StreamlineLeftDomain { s: f64 },

    #[error("geodesic left the grid patch at parameter {s:.6}")]
    LeftPatch { s: f64 },

    #[error("four-velocity normalization drifted by {drift:.3e} (tolerance {tol:.3e})")]
    NormalizationDrift { drift: f64, tol: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("snapshot format error: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
