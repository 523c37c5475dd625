//! Error type shared by every module in the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be an integer >= 2, got {0}")]
    DimensionTooSmall(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(
        "quadrature did not converge: estimate {estimate:.17e}, \
         error bound {error_bound:.3e} > tolerance {tol:.3e}"
    )]
    QuadratureNonConvergence {
        estimate: f64,
        error_bound: f64,
        tol: f64,
    },

    #[error("{label}: two routes differ by {diff:.3e} (allowed {allowed:.3e})")]
    ConsistencyMismatch {
        label: String,
        diff: f64,
        allowed: f64,
    },

    #[error("integration blew up at radius {radius:.6e}")]
    OdeBlowUp { radius: f64 },

    #[error("did not converge: {0}")]
    NonConvergence(String),
}

impl Error {
    /// Process exit code the CLI maps this error to: 1 for domain errors,
    /// 2 for numerical non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionTooSmall(_)
            | Error::InvalidArgument(_)
            | Error::Unsupported(_)
            | Error::InsufficientData(_) => 1,
            Error::QuadratureNonConvergence { .. }
            | Error::ConsistencyMismatch { .. }
            | Error::OdeBlowUp { .. }
            | Error::NonConvergence(_) => 2,
        }
    }
}
