use thiserror::Error;

/// Errors raised by the solvers and samplers in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time {t} is not a point of the grid (dt = {dt}, horizon = {horizon})")]
    OffGrid { t: f64, dt: f64, horizon: f64 },

    #[error("paths are defined on different grids")]
    GridMismatch,

    #[error(
        "spectral radius of |R - I| is {radius} (must be < 1); \
         the contraction solver does not apply, use the penalty solver instead"
    )]
    NotContractive { radius: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error(
        "time step {dt:e} exceeds the stability limit eps^2/10 = {max_dt:e}; \
         use at least {required_steps} steps on this horizon"
    )]
    Stability {
        dt: f64,
        max_dt: f64,
        required_steps: usize,
    },

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("closed-form and enumerated completely-S checks disagree for n = {n}, a = {a}")]
    CrossCheck { n: usize, a: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
