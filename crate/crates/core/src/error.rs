use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("energy constraint violated: expected {expected}, got {got}")]
    Constraint { expected: f64, got: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("series not converged: tail bound {bound:e} exceeds tolerance {tol:e}")]
    NotConverged { bound: f64, tol: f64 },

    #[error("perturbation amplitude too large: minimum eigenvalue {min_eigenvalue:e}")]
    EpsilonTooLarge { min_eigenvalue: f64 },

    #[error("quadrature diverged: trace error {0:e}")]
    QuadratureDiverged(f64),
}
