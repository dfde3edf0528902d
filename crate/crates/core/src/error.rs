use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the covariance calculus and the model layer on top of it.
///
/// `NonConvergence` is the only genuinely numerical failure; everything else
/// indicates a bad argument or an inconsistent model.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix asymmetry {asymmetry:.3e} exceeds {tolerance:.3e} (relative to the largest entry)")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("{context}: not positive semi-definite (eigenvalue {eigenvalue:.6e} below cutoff {cutoff:.6e})")]
    NotPsd {
        context: String,
        eigenvalue: f64,
        cutoff: f64,
    },

    #[error("Jacobi eigendecomposition of {context} ({dim}x{dim}) did not converge")]
    NonConvergence { context: String, dim: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(String),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. })
    }
}
