use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice {m}x{k}: {reason}")]
    InvalidLattice { m: usize, k: usize, reason: String },

    #[error("invalid sector: {0}")]
    InvalidSector(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("capacity exceeded for {what}: requested {requested}, limit {limit}")]
    Capacity {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver did not converge in {iterations} matvecs (best residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("degenerate ground state: gap {gap:.3e} below tolerance {tol:.1e}")]
    DegenerateGroundState { gap: f64, tol: f64 },

    #[error("step floor reached: interval [{lo}, {hi}] narrower than 2*{min_step}")]
    StepFloor { lo: f64, hi: f64, min_step: f64 },

    #[error("divergent cost: {0}")]
    Divergent(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("singular fit: {0}")]
    SingularFit(String),

    #[error("evaluation failed at s = {s}: {source}")]
    PointFailed { s: f64, source: Box<Error> },
}

impl Error {
    /// Innermost error, looking through `PointFailed` wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::PointFailed { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
