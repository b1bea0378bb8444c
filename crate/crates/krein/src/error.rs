//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KreinError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tol {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("Gram matrix is numerically singular: smallest singular value {sigma_min:.3e}")]
    SingularGram { sigma_min: f64 },

    #[error("cannot classify the zero vector")]
    ZeroVector,

    #[error("basis columns are not linearly independent: rank {rank} of {count}")]
    DependentBasis { rank: usize, count: usize },

    #[error("not a fundamental symmetry: {0}")]
    NotFundamental(String),

    #[error("matrix is not positive semidefinite: min eigenvalue {0:.6e}")]
    NotPositive(f64),

    #[error("operator is not self-adjoint for the indefinite form: residual {0:.3e}")]
    NotSelfAdjoint(f64),

    #[error("generator {index} is not unitary for the indefinite form: residual {residual:.3e}")]
    NotJUnitary { index: usize, residual: f64 },

    #[error("majorant is not comparable with the canonical minimal one: {0}")]
    IncomparableMajorant(String),

    #[error("order violated: {0}")]
    OrderViolated(String),

    #[error("hypothesis check failed: {0}")]
    HypothesisFailed(String),

    #[error("index {index} out of bounds for length {len}")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailed,

    #[error("{0}")]
    Invalid(String),
}
