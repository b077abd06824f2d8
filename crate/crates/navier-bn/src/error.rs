//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension n={n}: {reason}")]
    InvalidDimension { n: i64, reason: String },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("linear solve failed: {reason} (grid: n={n}, points={points}, r_min={r_min:.3e}, rho={rho:.3e})")]
    SolverFailure {
        reason: String,
        n: usize,
        points: usize,
        r_min: f64,
        rho: f64,
    },

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("cross-check failed: {0}")]
    CrossCheckFailure(String),

    #[error("negativity set of the potential is empty (V >= 0 everywhere on [0, rho])")]
    EmptyNegativitySet,

    #[error("minimizer did not converge: {reason} (best gradient norm {grad_norm:.3e} after {iterations} iterations)")]
    NonConvergence {
        reason: String,
        grad_norm: f64,
        iterations: usize,
    },

    #[error("decomposition fit failed: {0}")]
    FitFailure(String),

    #[error("config error: key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid_arg(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }
}
