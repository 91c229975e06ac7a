use thiserror::Error;

/// Errors raised by field operations, the flow integrator and the eigensolver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("degenerate metric: {0}")]
    DegenerateMetric(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("flow step failed at t = {t}: {detail} (min det g = {min_det})")]
    StepFailure { t: f64, min_det: f64, detail: String },

    #[error("eigensolver failed: {0}")]
    SolverFailure(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<V> = std::result::Result<V, Error>;
