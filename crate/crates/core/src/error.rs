use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name} must be {requirement}, got {value}")]
    Domain {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("centrifugal term L(L+1) = {l_term} is singular at r = 0")]
    SingularPoint { l_term: f64 },

    #[error("t = {0} lies outside [-1, 1)")]
    OutOfRange(f64),

    #[error("grid has {len} points, at least {min} are required")]
    GridTooShort { len: usize, min: usize },

    #[error("grid/sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("invalid sector specification: {0}")]
    InvalidSector(String),

    #[error("bisection for eigenvalue {index} did not converge, bracket [{lo}, {hi}]")]
    Bisection { index: usize, lo: f64, hi: f64 },

    #[error("inverse iteration stagnated for eigenvalue {index} (residual {residual:e})")]
    InverseIteration { index: usize, residual: f64 },

    #[error("Newton iteration for Gauss-Jacobi node {index} did not converge")]
    QuadratureNewton { index: usize },

    #[error("ground-state integration blew up at s = {s}")]
    OdeBlowUp { s: f64 },

    #[error("requested {requested} eigenpairs from a matrix of dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            name,
            requirement: "finite and > 0",
            value,
        })
    }
}
