//! Indefinite inner-product spaces at finite dimension.
//!
//! An [`IndefiniteSpace`] wraps a Hermitian Gram matrix `G` defining the form
//! `[x, y] = y† G x` (linear in the first slot, antilinear in the second).
//! When `G` is invertible the space carries fundamental symmetries: involutions
//! `J` for which `[J·,·]` is a Hilbert inner product. The canonical one is
//! `J = G·|G|⁻¹`, fixed here so every analysis is deterministic.

use crate::linalg::{
    self, cr, hermitian_residual, hermitize, identity, is_real, max_abs, real_part,
};
use crate::{CMatrix, CVector, KreinError, Result, Scalar, Verdict};

/// Sign class of a single vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeLabel {
    Positive,
    Negative,
    Neutral,
}

impl ConeLabel {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            ConeLabel::Positive => "positive",
            ConeLabel::Negative => "negative",
            ConeLabel::Neutral => "neutral",
        }
    }
}

/// Sign class of a subspace (from the restricted form).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceKind {
    Positive,
    Negative,
    Neutral,
    Indefinite,
}

impl SubspaceKind {
    #[must_use]
    pub fn as_str(self) -> &'static str {
        match self {
            SubspaceKind::Positive => "positive",
            SubspaceKind::Negative => "negative",
            SubspaceKind::Neutral => "neutral",
            SubspaceKind::Indefinite => "indefinite",
        }
    }
}

/// Classification of a subspace: sign label, eigenvalue signature of the
/// restricted Gram, and regularity flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceClass {
    pub kind: SubspaceKind,
    /// Counts (p, q, z) of positive / negative / zero eigenvalues.
    pub signature: (usize, usize, usize),
    /// `z = 0`: the restricted form is non-degenerate.
    pub regular: bool,
    /// `z > 0`: the subspace has a nonzero isotropic part.
    pub degenerate: bool,
}

/// A subspace given by linearly independent basis columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    ambient: usize,
    basis: CMatrix,
}

impl Subspace {
    /// Builds a subspace from basis columns, rejecting dependent sets.
    pub fn new(ambient: usize, basis: CMatrix) -> Result<Self> {
        if basis.nrows() != ambient && basis.ncols() != 0 {
            return Err(KreinError::DimensionMismatch(format!(
                "basis vectors have length {}, ambient dimension is {ambient}",
                basis.nrows()
            )));
        }
        let count = basis.ncols();
        if count > 0 {
            let rank = linalg::rank(&basis, crate::RANK_TOL);
            if rank < count {
                return Err(KreinError::DependentBasis { rank, count });
            }
        }
        Ok(Subspace {
            ambient,
            basis: if count == 0 {
                CMatrix::zeros(ambient, 0)
            } else {
                basis
            },
        })
    }

    /// Builds a subspace from a list of vectors.
    pub fn from_vectors(ambient: usize, vectors: &[CVector]) -> Result<Self> {
        let basis = CMatrix::from_fn(ambient, vectors.len(), |i, j| vectors[j][i]);
        Subspace::new(ambient, basis)
    }

    /// The zero subspace.
    #[must_use]
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: CMatrix::zeros(ambient, 0),
        }
    }

    /// The whole ambient space.
    #[must_use]
    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: identity(ambient),
        }
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    #[must_use]
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    #[must_use]
    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    /// True if `v` lies in the span within `tol`.
    #[must_use]
    pub fn contains(&self, v: &CVector, tol: f64) -> bool {
        let m = CMatrix::from_fn(self.ambient, 1, |i, _| v[i]);
        linalg::span_contains(&self.basis, &m, tol)
    }

    /// True if the two subspaces have the same span within `tol`.
    #[must_use]
    pub fn same_span(&self, other: &Subspace, tol: f64) -> bool {
        self.ambient == other.ambient && linalg::same_span(&self.basis, &other.basis, tol)
    }
}

/// An involution `J` whose induced form `[J·,·]` is positive definite,
/// together with that Hilbert metric `G·J`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalSymmetry {
    j: CMatrix,
    metric: CMatrix,
}

impl FundamentalSymmetry {
    /// Validates `j` against the space: `J² = I` and `G·J` Hermitian positive
    /// definite, both within the space tolerance.
    pub fn new(space: &IndefiniteSpace, j: CMatrix) -> Result<Self> {
        let d = space.dim();
        if j.nrows() != d || j.ncols() != d {
            return Err(KreinError::DimensionMismatch(format!(
                "symmetry is {}x{}, space dimension is {d}",
                j.nrows(),
                j.ncols()
            )));
        }
        let tol = space.tol();
        let invol = linalg::max_abs_diff(&(&j * &j), &identity(d));
        if invol > tol.max(1e-9 * max_abs(&j).max(1.0)) {
            return Err(KreinError::NotFundamental(format!(
                "J^2 - I has max entry {invol:e}"
            )));
        }
        let metric = space.gram() * &j;
        let herm = hermitian_residual(&metric);
        if herm > tol.max(1e-9 * max_abs(&metric).max(1.0)) {
            return Err(KreinError::NotFundamental(format!(
                "induced metric is not Hermitian (residual {herm:e})"
            )));
        }
        let metric = hermitize(&metric);
        let min = linalg::min_eigenvalue(&metric);
        if min <= tol * max_abs(&metric).max(1.0) {
            return Err(KreinError::NotFundamental(format!(
                "induced metric is not positive definite (min eigenvalue {min:e})"
            )));
        }
        Ok(FundamentalSymmetry { j, metric })
    }

    #[must_use]
    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    /// The Hilbert metric `G·J` (Hermitian positive definite).
    #[must_use]
    pub fn metric(&self) -> &CMatrix {
        &self.metric
    }

    /// Hilbert inner product `⟨x, y⟩ = [Jx, y] = y†(GJ)x`.
    #[must_use]
    pub fn hilbert_inner(&self, x: &CVector, y: &CVector) -> Scalar {
        (y.adjoint() * &self.metric * x)[(0, 0)]
    }

    /// Hilbert norm `√⟨x, x⟩`.
    #[must_use]
    pub fn norm(&self, x: &CVector) -> f64 {
        self.hilbert_inner(x, x).re.max(0.0).sqrt()
    }

    /// Signature (p, q) of the space: dimensions of the ±1 eigenspaces of J.
    /// Uses `tr J = p − q` together with `p + q = dim`, both exact for
    /// involutions.
    #[must_use]
    pub fn signature(&self) -> (usize, usize) {
        let d = self.j.nrows() as f64;
        let tr: Scalar = self.j.diagonal().iter().sum();
        let p = ((d + tr.re) / 2.0).round();
        (p as usize, (d - p) as usize)
    }
}

/// A finite-dimensional space with a Hermitian sesquilinear form.
#[derive(Debug, Clone, PartialEq)]
pub struct IndefiniteSpace {
    gram: CMatrix,
    tol: f64,
}

impl IndefiniteSpace {
    /// Wraps a Hermitian Gram matrix. The stored matrix is symmetrized after
    /// the Hermitian check (max entry of `G − G†` against `tol`) passes.
    pub fn new(gram: CMatrix, tol: f64) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(KreinError::DimensionMismatch(format!(
                "Gram matrix is {}x{}",
                gram.nrows(),
                gram.ncols()
            )));
        }
        let residual = hermitian_residual(&gram);
        if residual > tol.max(1e-9 * max_abs(&gram).max(1.0)) {
            return Err(KreinError::NotHermitian { residual, tol });
        }
        Ok(IndefiniteSpace {
            gram: hermitize(&gram),
            tol,
        })
    }

    /// Wraps a Gram matrix with the default tolerance.
    pub fn with_default_tol(gram: CMatrix) -> Result<Self> {
        IndefiniteSpace::new(gram, crate::DEFAULT_TOL)
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    #[must_use]
    pub fn gram(&self) -> &CMatrix {
        &self.gram
    }

    #[must_use]
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// True when the Gram matrix is (numerically) singular.
    #[must_use]
    pub fn is_degenerate(&self) -> bool {
        let sv = linalg::singular_values(&self.gram);
        match sv.first() {
            None | Some(0.0) => true,
            Some(&max) => sv[sv.len() - 1] <= self.tol * max,
        }
    }

    fn check_len(&self, v: &CVector, what: &str) -> Result<()> {
        if v.len() != self.dim() {
            return Err(KreinError::DimensionMismatch(format!(
                "{what} has length {}, space dimension is {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    fn check_square(&self, a: &CMatrix, what: &str) -> Result<()> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(KreinError::DimensionMismatch(format!(
                "{what} is {}x{}, space dimension is {}",
                a.nrows(),
                a.ncols(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// The form `[x, y] = y† G x`.
    pub fn inner(&self, x: &CVector, y: &CVector) -> Result<Scalar> {
        self.check_len(x, "x")?;
        self.check_len(y, "y")?;
        Ok((y.adjoint() * &self.gram * x)[(0, 0)])
    }

    /// Sign class of `[x, x]` with neutral band `|[x,x]| ≤ tol·‖x‖²`.
    pub fn classify_vector(&self, x: &CVector) -> Result<ConeLabel> {
        self.check_len(x, "x")?;
        let norm2 = x.norm_squared();
        if norm2 == 0.0 {
            return Err(KreinError::ZeroVector);
        }
        let value = self.inner(x, x)?.re;
        Ok(if value.abs() <= self.tol * norm2 {
            ConeLabel::Neutral
        } else if value > 0.0 {
            ConeLabel::Positive
        } else {
            ConeLabel::Negative
        })
    }

    /// The canonical fundamental symmetry `J = G·|G|⁻¹` (spectral sign of G).
    /// Deterministic and basis-independent; real when `G` is real.
    pub fn canonical_symmetry(&self) -> Result<FundamentalSymmetry> {
        let eig = linalg::herm_eigen(&self.gram);
        let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(KreinError::SingularGram { sigma_min: 0.0 });
        }
        let min = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min <= self.tol * scale {
            return Err(KreinError::SingularGram { sigma_min: min });
        }
        let mut j = eig.map(|v| v.signum());
        if is_real(&self.gram, 1e-13) {
            j = linalg::to_complex(&real_part(&j));
        }
        FundamentalSymmetry::new(self, hermitize(&j))
    }

    /// Splits the space along a fundamental symmetry: bases of the ±1
    /// eigenspaces of `J` and the signature `(p, q)`. The restricted form is
    /// checked positive definite on the plus side and negative definite on
    /// the minus side.
    pub fn fundamental_decomposition(
        &self,
        fs: &FundamentalSymmetry,
    ) -> Result<(CMatrix, CMatrix, (usize, usize))> {
        let d = self.dim();
        let half = cr(0.5);
        let plus = linalg::column_space(&((identity(d) + fs.j()) * half), crate::RANK_TOL);
        let minus = linalg::column_space(&((identity(d) - fs.j()) * half), crate::RANK_TOL);
        let (p, q) = (plus.ncols(), minus.ncols());
        if p + q != d {
            return Err(KreinError::NotFundamental(format!(
                "eigenspace dimensions {p} + {q} do not fill dimension {d}"
            )));
        }
        for (name, basis, sign) in [("plus", &plus, 1.0), ("minus", &minus, -1.0)] {
            if basis.ncols() == 0 {
                continue;
            }
            let restricted = hermitize(&(basis.adjoint() * &self.gram * basis)) * cr(sign);
            let min = linalg::min_eigenvalue(&restricted);
            if min <= self.tol * max_abs(&restricted).max(1.0) {
                return Err(KreinError::NotFundamental(format!(
                    "form is not definite on the {name} eigenspace (min eigenvalue {min:e})"
                )));
            }
        }
        Ok((plus, minus, (p, q)))
    }

    /// Adjoint with respect to the form: `A^[*] = G⁻¹ A† G`, so that
    /// `[Ax, y] = [x, A^[*] y]`.
    pub fn j_adjoint(&self, a: &CMatrix) -> Result<CMatrix> {
        self.check_square(a, "operator")?;
        let g_inv = linalg::inverse(&self.gram)?;
        Ok(g_inv * a.adjoint() * &self.gram)
    }

    /// Verdict on `A^[*] = A`, residual in the max norm.
    pub fn is_j_selfadjoint(&self, a: &CMatrix) -> Result<Verdict> {
        let adj = self.j_adjoint(a)?;
        let residual = linalg::max_abs_diff(&adj, a);
        Ok(Verdict::new(residual, self.tol * max_abs(a).max(1.0)))
    }

    /// Verdict on form-preservation: `T^[*] T = T T^[*] = I`, residual =
    /// worst max-norm deviation of the two products from the identity.
    pub fn is_j_unitary(&self, t: &CMatrix) -> Result<Verdict> {
        let adj = self.j_adjoint(t)?;
        let d = self.dim();
        let r1 = linalg::max_abs_diff(&(&adj * t), &identity(d));
        let r2 = linalg::max_abs_diff(&(t * &adj), &identity(d));
        Ok(Verdict::new(r1.max(r2), self.tol))
    }

    /// Restriction of the Gram matrix to a subspace basis: `B† G B`.
    pub fn restricted_gram(&self, l: &Subspace) -> Result<CMatrix> {
        if l.ambient_dim() != self.dim() {
            return Err(KreinError::DimensionMismatch(format!(
                "subspace lives in dimension {}, space dimension is {}",
                l.ambient_dim(),
                self.dim()
            )));
        }
        Ok(hermitize(&(l.basis().adjoint() * &self.gram * l.basis())))
    }

    /// The orthogonal companion `{x : [x, y] = 0 for all y ∈ L}`, computed as
    /// the nullspace of `B† G`.
    pub fn orthogonal_companion(&self, l: &Subspace) -> Result<Subspace> {
        if l.ambient_dim() != self.dim() {
            return Err(KreinError::DimensionMismatch(format!(
                "subspace lives in dimension {}, space dimension is {}",
                l.ambient_dim(),
                self.dim()
            )));
        }
        if l.dim() == 0 {
            return Ok(Subspace::full(self.dim()));
        }
        let rows = l.basis().adjoint() * &self.gram;
        let ns = linalg::nullspace_auto(&rows, crate::RANK_TOL);
        Subspace::new(self.dim(), ns)
    }

    /// The isotropic part `L ∩ L^[⊥]`: vectors of `L` orthogonal to all of
    /// `L`, i.e. `B·c` for `c` in the nullspace of the restricted Gram.
    pub fn isotropic_part(&self, l: &Subspace) -> Result<Subspace> {
        if l.dim() == 0 {
            return Ok(Subspace::zero(self.dim()));
        }
        let restricted = self.restricted_gram(l)?;
        let coeffs = linalg::nullspace_auto(&restricted, crate::RANK_TOL);
        if coeffs.ncols() == 0 {
            return Ok(Subspace::zero(self.dim()));
        }
        let vectors = l.basis() * coeffs;
        Subspace::new(self.dim(), linalg::column_space(&vectors, crate::RANK_TOL))
    }

    /// Classifies a subspace from the eigenvalue signs of the restricted
    /// Gram. Zero band: `|λ| ≤ tol·max|λ|`.
    pub fn classify_subspace(&self, l: &Subspace) -> Result<SubspaceClass> {
        let restricted = self.restricted_gram(l)?;
        let eig = linalg::herm_eigen(&restricted);
        let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = self.tol * scale;
        let mut p = 0;
        let mut q = 0;
        let mut z = 0;
        for v in &eig.values {
            if v.abs() <= cut {
                z += 1;
            } else if *v > 0.0 {
                p += 1;
            } else {
                q += 1;
            }
        }
        let kind = match (p, q) {
            (0, 0) => SubspaceKind::Neutral,
            (_, 0) => SubspaceKind::Positive,
            (0, _) => SubspaceKind::Negative,
            _ => SubspaceKind::Indefinite,
        };
        Ok(SubspaceClass {
            kind,
            signature: (p, q, z),
            regular: z == 0,
            degenerate: z > 0,
        })
    }
}

/// Smallest `c ≥ 1` with `c⁻¹‖x‖₂ ≤ ‖x‖₁ ≤ c‖x‖₂` for the Hilbert norms of
/// two positive definite metrics: `c = √max(λ_max, 1/λ_min)` over the
/// spectrum of `M₂^{-1/2} M₁ M₂^{-1/2}`.
pub fn norm_equivalence_constant(m1: &CMatrix, m2: &CMatrix) -> Result<f64> {
    if m1.shape() != m2.shape() {
        return Err(KreinError::DimensionMismatch(format!(
            "metrics are {}x{} and {}x{}",
            m1.nrows(),
            m1.ncols(),
            m2.nrows(),
            m2.ncols()
        )));
    }
    let eig2 = linalg::herm_eigen(m2);
    if eig2.values.iter().any(|v| *v <= 0.0) {
        return Err(KreinError::NotPositive(eig2.values[0]));
    }
    let inv_sqrt = eig2.map(|v| 1.0 / v.sqrt());
    let t = hermitize(&(&inv_sqrt * m1 * &inv_sqrt));
    let eig = linalg::herm_eigen(&t);
    let min = eig.values[0];
    let max = eig.values[eig.values.len() - 1];
    if min <= 0.0 {
        return Err(KreinError::NotPositive(min));
    }
    Ok(max.max(1.0 / min).sqrt())
}
