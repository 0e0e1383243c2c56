//! Crate-wide error type.

/// Errors produced by design and analysis routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Input matrix is not symmetric within the allowed relative asymmetry.
    #[error("matrix is not symmetric: relative asymmetry {asymmetry:.3e} exceeds 1e-10")]
    NotSymmetric { asymmetry: f64 },

    /// Input matrix has an eigenvalue below the negative tolerance band.
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.6e}")]
    NotPsd { eigenvalue: f64 },

    /// A row of the analog matrix is linearly dependent under the covariance metric.
    #[error("row {row} is linearly dependent under the covariance metric")]
    RankDeficientRow { row: usize },

    /// Fixed-point iteration hit its cap before reaching the distortion tolerance.
    #[error("Lloyd iteration did not converge: last relative distortion change {delta:.3e}")]
    NonConvergence { delta: f64 },

    /// The input distribution carries no energy but the quantization error is nonzero.
    #[error("input second moment is zero with nonzero quantization error")]
    ZeroSecondMoment,

    /// Sample covariance of the quantizer inputs cannot be inverted.
    #[error("sample input covariance is singular along component {component}")]
    SingularCovariance { component: usize },

    /// Eigenvalues passed to an MSE formula were not sorted in non-increasing order.
    #[error("eigenvalues must be non-increasing (violated at index {index})")]
    UnsortedEigenvalues { index: usize },

    /// The analog matrix does not satisfy the metric-orthogonality restriction.
    #[error("analog matrix violates metric orthogonality: relative off-diagonal {magnitude:.3e}")]
    Restriction1Violation { magnitude: f64 },

    /// A Bussgang gain matrix expected to be diagonal has significant off-diagonals.
    #[error("Bussgang gain is not diagonal: relative off-diagonal {magnitude:.3e}")]
    NonDiagonalGain { magnitude: f64 },

    /// Mismatched matrix/vector dimensions.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Any other violated precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
