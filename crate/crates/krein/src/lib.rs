//! Finite-dimensional Krein spaces and indefinite Hermitian kernels.
//!
//! A Krein space here is `C^n` equipped with the sesquilinear form
//! `[x, y] = y^* G x` induced by an invertible Hermitian Gram matrix `G`.
//! The crate provides:
//!
//! * [`space`] — the form itself: vector/subspace classification, fundamental
//!   symmetries, adjoints and unitaries of the indefinite form;
//! * [`kernels`] — Hermitian kernel matrices on finite point sets, bounded
//!   and minimal kernel pairs, reproducing-kernel spaces built from a few
//!   stock kernel functions;
//! * [`representations`] — matrix group actions: invariance and domination
//!   checks, commutants, spectral (Schur-type) analysis of commutant
//!   elements, irreducibility reports;
//! * [`decomposition`] — splitting an invariant kernel pair into invariant
//!   subpairs with per-component certificates and a Parseval check.
//!
//! All numerical verdicts carry the residual they were decided on, and every
//! tolerance is an explicit argument; nothing is decided by hidden state.

pub mod decomposition;
pub mod error;
pub mod io;
pub mod kernels;
pub mod linalg;
pub mod report;
pub mod representations;
pub mod space;

pub use error::KreinError;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, KreinError>;

/// Complex double-precision scalar used throughout.
pub type Scalar = nalgebra::Complex<f64>;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<Scalar>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<Scalar>;
/// Dense real matrix (inputs that stay real are kept real).
pub type RMatrix = nalgebra::DMatrix<f64>;
/// Dense real column vector.
pub type RVector = nalgebra::DVector<f64>;

/// Default tolerance for Hermiticity, unitarity and self-adjointness checks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default relative cutoff for rank decisions (singular values below
/// `RANK_TOL * sigma_max` count as zero).
pub const RANK_TOL: f64 = 1e-10;
/// Default seed for every randomized search in the crate.
pub const DEFAULT_SEED: u64 = 0xC0FFEE;

/// Outcome of a tolerance-based yes/no check together with the residual it
/// was decided on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdict {
    pub ok: bool,
    pub residual: f64,
}

impl Verdict {
    #[must_use]
    pub fn new(residual: f64, tol: f64) -> Self {
        Verdict {
            ok: residual <= tol,
            residual,
        }
    }
}

/// Three-valued verdict for searches that may terminate without a proof
/// either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trilean {
    True,
    False,
    Inconclusive,
}

impl Trilean {
    #[must_use]
    pub fn from_bool(b: bool) -> Self {
        if b {
            Trilean::True
        } else {
            Trilean::False
        }
    }

    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            Trilean::True => "true",
            Trilean::False => "false",
            Trilean::Inconclusive => "inconclusive",
        }
    }
}
