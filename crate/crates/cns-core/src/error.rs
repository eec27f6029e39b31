//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid mismatch: expected n = {expected}, got n = {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: expected {expected} samples, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("Hermitian symmetry violated: max |c(-k) - conj(c(k))| = {residual:.3e} exceeds {tolerance:.3e}")]
    HermitianViolation { residual: f64, tolerance: f64 },

    #[error("field has nonzero mean mode: |c(0)| = {0:.3e}")]
    NonzeroMean(f64),

    #[error("negative time t = {0} not allowed")]
    NegativeTime(f64),

    #[error("field is off the unit sphere: | |u|_H - 1 | = {drift:.3e} exceeds {tolerance:.3e}")]
    OffManifold { drift: f64, tolerance: f64 },

    #[error("time {t} outside the recorded span [{start}, {end}]")]
    OutsideSpan { t: f64, start: f64, end: f64 },

    #[error("advective CFL violated: dt * max|u| * n/2 = {cfl:.3} > 1 (reduce dt below {dt_max:.3e})")]
    CflViolation { cfl: f64, dt_max: f64 },

    #[error("non-finite coefficients after step {step} (blow-up or bad dt)")]
    NonFinite { step: usize },

    #[error("constraint drift | |u|_H - 1 | = {drift:.3e} exceeded {limit:.3e} at step {step}")]
    DriftAbort { drift: f64, limit: f64, step: usize },

    #[error("Picard iteration did not converge within {max_iters} iterations (last distance {last_distance:.3e})")]
    NoConvergence { max_iters: usize, last_distance: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
