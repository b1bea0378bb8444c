//! Hermitian and positive kernels on finite point sets.
//!
//! A kernel is a Hermitian matrix of pairwise values, optionally generated by
//! a named kernel function evaluated on sample points. The module provides
//! the positivity order, boundedness and independence of kernels, canonical
//! minimal majorants `H = |K|`, spans with a reproducing identity, images
//! under linear maps, and a demonstration that one Hermitian kernel can be
//! shared by two genuinely different direct sums.

use crate::linalg::{self, cr, hermitian_residual, hermitize, max_abs, to_complex};
use crate::report::Report;
use crate::space::IndefiniteSpace;
use crate::{CMatrix, CVector, KreinError, RMatrix, RVector, Result, Scalar, Verdict};

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Minkowski metric diag(1, −1, −1) on ℝ³, the default for the
/// `lorentz-*` kernel family.
#[must_use]
pub fn minkowski_metric() -> RMatrix {
    RMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0])
}

/// Evaluation points standing for abstract indices `0..n` (used by
/// custom-matrix kernels).
#[must_use]
pub fn index_points(n: usize) -> Vec<RVector> {
    (0..n).map(|i| RVector::from_element(1, i as f64)).collect()
}

/// A named kernel function `k(x, y)` with `k(x, y) = conj(k(y, x))`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelFunction {
    /// `exp(⟨Jx, y⟩)` for a symmetric metric J.
    LorentzExp { metric: RMatrix },
    /// `⟨Jx, y⟩ⁿ / n!`.
    LorentzPoly { degree: usize, metric: RMatrix },
    /// Euclidean `exp(x·y)`.
    DotExp,
    /// Euclidean `(x·y)ⁿ / n!`.
    DotPoly { degree: usize },
    /// Values looked up by index: points are 1-vectors holding indices.
    Custom { values: CMatrix },
}

impl KernelFunction {
    #[must_use]
    pub fn lorentz_exp() -> Self {
        KernelFunction::LorentzExp {
            metric: minkowski_metric(),
        }
    }

    #[must_use]
    pub fn lorentz_poly(degree: usize) -> Self {
        KernelFunction::LorentzPoly {
            degree,
            metric: minkowski_metric(),
        }
    }

    #[must_use]
    pub fn dot_exp() -> Self {
        KernelFunction::DotExp
    }

    #[must_use]
    pub fn dot_poly(degree: usize) -> Self {
        KernelFunction::DotPoly { degree }
    }

    /// Custom kernel from a Hermitian value matrix.
    pub fn custom(values: CMatrix, tol: f64) -> Result<Self> {
        let residual = hermitian_residual(&values);
        if residual > tol.max(1e-9 * max_abs(&values).max(1.0)) {
            return Err(KreinError::NotHermitian { residual, tol });
        }
        Ok(KernelFunction::Custom {
            values: hermitize(&values),
        })
    }

    /// Builds a kernel function from parsed spec parts.
    pub fn from_parts(
        name: &str,
        degree: Option<usize>,
        metric: Option<RMatrix>,
        values: Option<CMatrix>,
    ) -> Result<Self> {
        let metric_or_default = |m: Option<RMatrix>| -> Result<RMatrix> {
            let m = m.unwrap_or_else(minkowski_metric);
            let mt = m.transpose();
            if (&m - &mt).iter().any(|d| d.abs() > 1e-12) {
                return Err(KreinError::Invalid(
                    "kernel metric must be symmetric".into(),
                ));
            }
            Ok(m)
        };
        let need_degree = || {
            degree.ok_or_else(|| KreinError::Invalid(format!("kernel `{name}` needs degree=<n>")))
        };
        match name {
            "lorentz-exp" => Ok(KernelFunction::LorentzExp {
                metric: metric_or_default(metric)?,
            }),
            "lorentz-poly" => Ok(KernelFunction::LorentzPoly {
                degree: need_degree()?,
                metric: metric_or_default(metric)?,
            }),
            "dot-exp" => Ok(KernelFunction::DotExp),
            "dot-poly" => Ok(KernelFunction::DotPoly {
                degree: need_degree()?,
            }),
            "custom-matrix" => {
                let values = values.ok_or_else(|| {
                    KreinError::Invalid("kernel `custom-matrix` needs values=<file>".into())
                })?;
                KernelFunction::custom(values, crate::DEFAULT_TOL)
            }
            other => Err(KreinError::Invalid(format!("unknown kernel `{other}`"))),
        }
    }

    /// Display name in the kernel-spec-line syntax.
    #[must_use]
    pub fn name(&self) -> String {
        match self {
            KernelFunction::LorentzExp { .. } => "lorentz-exp".into(),
            KernelFunction::LorentzPoly { degree, .. } => format!("lorentz-poly({degree})"),
            KernelFunction::DotExp => "dot-exp".into(),
            KernelFunction::DotPoly { degree } => format!("dot-poly({degree})"),
            KernelFunction::Custom { .. } => "custom-matrix".into(),
        }
    }

    fn bilinear(metric: &RMatrix, x: &RVector, y: &RVector) -> Result<f64> {
        let d = metric.nrows();
        if x.len() != d || y.len() != d {
            return Err(KreinError::DimensionMismatch(format!(
                "points of length {} and {} against a {d}-dimensional metric",
                x.len(),
                y.len()
            )));
        }
        Ok((y.transpose() * metric * x)[(0, 0)])
    }

    fn index_of(v: &RVector, len: usize) -> Result<usize> {
        if v.len() != 1 {
            return Err(KreinError::Invalid(
                "custom kernels take 1-dimensional index points".into(),
            ));
        }
        let idx = v[0].round();
        if (v[0] - idx).abs() > 1e-9 || idx < 0.0 || idx as usize >= len {
            return Err(KreinError::IndexOutOfBounds {
                index: idx as i64 as usize,
                len,
            });
        }
        Ok(idx as usize)
    }

    /// Evaluates the kernel at a pair of points.
    pub fn eval(&self, x: &RVector, y: &RVector) -> Result<Scalar> {
        match self {
            KernelFunction::LorentzExp { metric } => Ok(cr(Self::bilinear(metric, x, y)?.exp())),
            KernelFunction::LorentzPoly { degree, metric } => {
                let v = Self::bilinear(metric, x, y)?;
                Ok(cr(v.powi(*degree as i32) / factorial(*degree)))
            }
            KernelFunction::DotExp => Ok(cr(x.dot(y).exp())),
            KernelFunction::DotPoly { degree } => {
                Ok(cr(x.dot(y).powi(*degree as i32) / factorial(*degree)))
            }
            KernelFunction::Custom { values } => {
                let i = Self::index_of(x, values.nrows())?;
                let j = Self::index_of(y, values.ncols())?;
                Ok(values[(i, j)])
            }
        }
    }
}

/// A Hermitian matrix of kernel values, with optional provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianKernel {
    matrix: CMatrix,
    points: Option<Vec<RVector>>,
    generator: Option<KernelFunction>,
}

impl HermitianKernel {
    /// Wraps a Hermitian matrix (checked, then symmetrized).
    pub fn new(matrix: CMatrix, tol: f64) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(KreinError::DimensionMismatch(format!(
                "kernel matrix is {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let residual = hermitian_residual(&matrix);
        if residual > tol.max(1e-9 * max_abs(&matrix).max(1.0)) {
            return Err(KreinError::NotHermitian { residual, tol });
        }
        Ok(HermitianKernel {
            matrix: hermitize(&matrix),
            points: None,
            generator: None,
        })
    }

    /// Evaluates a kernel function on points: `matrix[i][j] = k(x_i, x_j)`.
    pub fn from_function(kfun: &KernelFunction, points: &[RVector], tol: f64) -> Result<Self> {
        let n = points.len();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = kfun.eval(&points[i], &points[j])?;
            }
        }
        let mut k = HermitianKernel::new(m, tol)?;
        k.points = Some(points.to_vec());
        k.generator = Some(kfun.clone());
        Ok(k)
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    #[must_use]
    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    #[must_use]
    pub fn points(&self) -> Option<&[RVector]> {
        self.points.as_deref()
    }

    #[must_use]
    pub fn generator(&self) -> Option<&KernelFunction> {
        self.generator.as_ref()
    }

    #[must_use]
    pub fn rank(&self) -> usize {
        linalg::rank(&self.matrix, crate::RANK_TOL)
    }
}

/// Positivity verdict: smallest eigenvalue above `−tol·max|eigenvalue|`;
/// residual is the magnitude of the worst violation.
#[must_use]
pub fn is_positive(k: &HermitianKernel, tol: f64) -> Verdict {
    positive_matrix_verdict(k.matrix(), tol)
}

/// [`is_positive`] on a raw Hermitian matrix.
#[must_use]
pub fn positive_matrix_verdict(m: &CMatrix, tol: f64) -> Verdict {
    let (_, min) = linalg::psd_check(m, tol);
    let scale = max_abs(m).max(1e-300);
    Verdict::new((-min).max(0.0) / scale, tol)
}

/// Bounded-pair verdict: `H`, `H − K`, `H + K` all positive semidefinite.
pub fn is_bounded_pair(k: &HermitianKernel, h: &HermitianKernel, tol: f64) -> Result<Verdict> {
    if k.dim() != h.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "kernels of size {} and {}",
            k.dim(),
            h.dim()
        )));
    }
    Ok(bounded_pair_verdict(k.matrix(), h.matrix(), tol))
}

/// [`is_bounded_pair`] on raw Hermitian matrices. Positivity of the
/// differences is judged against the pair's scale, so that `H ± K` equal to
/// rounding noise still count as positive.
#[must_use]
pub fn bounded_pair_verdict(k: &CMatrix, h: &CMatrix, tol: f64) -> Verdict {
    let scale = max_abs(h).max(max_abs(k)).max(1e-300);
    let worst = [h.clone(), h - k, h + k]
        .iter()
        .map(|m| (-linalg::min_eigenvalue(m)).max(0.0))
        .fold(0.0, f64::max);
    Verdict::new(worst / scale, tol)
}

/// Independence of positive kernels: trivial range intersection, decided by
/// rank additivity `rank(A) + rank(B) = rank(A + B)`.
pub fn kernels_independent(a: &HermitianKernel, b: &HermitianKernel, tol: f64) -> Result<bool> {
    for (name, k) in [("first", a), ("second", b)] {
        let v = is_positive(k, tol);
        if !v.ok {
            return Err(KreinError::NotPositive(v.residual).context(name));
        }
    }
    Ok(independent_matrices(a.matrix(), b.matrix()))
}

/// Rank-additivity independence test on raw PSD matrices.
#[must_use]
pub fn independent_matrices(a: &CMatrix, b: &CMatrix) -> bool {
    // Both ranks are judged at the shared scale of the pair: a summand that
    // vanishes up to rounding is the zero kernel (rank 0, independent of
    // everything), not a noise matrix of spurious full rank.
    let t = crate::RANK_TOL;
    let scale = linalg::max_abs(a).max(linalg::max_abs(b));
    if scale == 0.0 {
        return true;
    }
    linalg::rank_at_scale(a, t, scale) + linalg::rank_at_scale(b, t, scale)
        == linalg::rank_at_scale(&(a + b), t, scale)
}

impl KreinError {
    fn context(self, what: &str) -> KreinError {
        match self {
            KreinError::NotPositive(v) => {
                KreinError::Invalid(format!("{what} kernel is not positive (violation {v:e})"))
            }
            other => other,
        }
    }
}

/// A Hermitian kernel with a positive majorant.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair {
    pub k: HermitianKernel,
    pub h: HermitianKernel,
    /// Kolmogorov minimality: `H − K` and `H + K` independent.
    pub minimal: bool,
    pub tol: f64,
}

impl KernelPair {
    /// Validates the bounded-pair order and records minimality.
    pub fn new(k: HermitianKernel, h: HermitianKernel, tol: f64) -> Result<Self> {
        let verdict = is_bounded_pair(&k, &h, tol)?;
        if !verdict.ok {
            return Err(KreinError::HypothesisFailed(format!(
                "(K, H) is not a bounded pair (positivity violation {:e})",
                verdict.residual
            )));
        }
        let minimal = independent_matrices(&(h.matrix() - k.matrix()), &(h.matrix() + k.matrix()));
        Ok(KernelPair { k, h, minimal, tol })
    }
}

/// The canonical minimal majorant `H = |K|` (spectral modulus), returned as
/// a verified Kolmogorov pair.
pub fn minimal_majorant(k: &HermitianKernel, tol: f64) -> Result<KernelPair> {
    let h = HermitianKernel::new(linalg::matrix_abs(k.matrix()), tol)?;
    KernelPair::new(k.clone(), h, tol)
}

/// Minimality of a given pair: independence of `H − K` and `H + K`.
/// Errors when `(K, H)` is not a bounded pair to begin with.
pub fn is_minimal_pair(k: &HermitianKernel, h: &HermitianKernel, tol: f64) -> Result<bool> {
    let verdict = is_bounded_pair(k, h, tol)?;
    if !verdict.ok {
        return Err(KreinError::HypothesisFailed(format!(
            "(K, H) is not a bounded pair (positivity violation {:e})",
            verdict.residual
        )));
    }
    Ok(independent_matrices(
        &(h.matrix() - k.matrix()),
        &(h.matrix() + k.matrix()),
    ))
}

/// Span of kernel sections at the sample points, carrying the reproducing
/// identity. Coefficient vectors `f` represent `Σⱼ fⱼ k(xⱼ, ·)`, and the
/// space's Gram is `G[i][j] = k(x_j, x_i)`.
#[derive(Debug, Clone)]
pub struct Rkks {
    pub space: IndefiniteSpace,
    pub kernel: HermitianKernel,
    /// Set when the Gram is singular (e.g. duplicate points).
    pub rank_deficient: bool,
}

/// Builds the reproducing span of a kernel function on points.
pub fn rkks_from_kernel(kfun: &KernelFunction, points: &[RVector], tol: f64) -> Result<Rkks> {
    if points.is_empty() {
        return Err(KreinError::Invalid(
            "at least one sample point is required".into(),
        ));
    }
    let kernel = HermitianKernel::from_function(kfun, points, tol)?;
    let gram = kernel.matrix().adjoint();
    let space = IndefiniteSpace::new(gram, tol)?;
    let rank_deficient = space.is_degenerate();
    Ok(Rkks {
        space,
        kernel,
        rank_deficient,
    })
}

impl Rkks {
    /// Residual of the reproducing identity at one point: the form applied
    /// to (section at `x_i`, f) minus the independent evaluation
    /// `Σⱼ fⱼ k(xⱼ, x_i)`.
    pub fn reproducing_residual(&self, f: &CVector, index: usize) -> Result<f64> {
        let n = self.space.dim();
        if index >= n {
            return Err(KreinError::IndexOutOfBounds { index, len: n });
        }
        if f.len() != n {
            return Err(KreinError::DimensionMismatch(format!(
                "coefficient vector has length {}, span has {n} sections",
                f.len()
            )));
        }
        let via_form = (self.space.gram() * f)[index];
        let points = self
            .kernel
            .points()
            .ok_or_else(|| KreinError::Invalid("span has no sample points".into()))?;
        let kfun = self
            .kernel
            .generator()
            .ok_or_else(|| KreinError::Invalid("span has no kernel function".into()))?;
        let mut direct = Scalar::new(0.0, 0.0);
        for j in 0..n {
            direct += f[j] * kfun.eval(&points[j], &points[index])?;
        }
        Ok((via_form - direct).norm())
    }
}

/// Image of a kernel under a linear map: `u K u†`, plus a regularity flag.
/// The flag is true when `ker(u) ∩ range(K)` is trivial or the restriction
/// of `K` to it is non-degenerate; when false the image may fail to inherit
/// the structure and is emitted with a warning by callers.
pub fn pushforward_kernel(
    u: &CMatrix,
    k: &HermitianKernel,
    tol: f64,
) -> Result<(HermitianKernel, bool)> {
    if u.ncols() != k.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "map takes dimension {}, kernel lives in dimension {}",
            u.ncols(),
            k.dim()
        )));
    }
    let image = HermitianKernel::new(u * k.matrix() * u.adjoint(), tol.max(crate::DEFAULT_TOL))?;
    let kernel_of_u = linalg::nullspace_auto(u, crate::RANK_TOL);
    let range_of_k = linalg::column_space(k.matrix(), crate::RANK_TOL);
    let meet = linalg::span_intersection(&kernel_of_u, &range_of_k, crate::RANK_TOL);
    let regular = if meet.ncols() == 0 {
        true
    } else {
        // The restriction is a sub-block of K, so its rank must be judged
        // against K's scale: a neutral direction gives an exact zero block
        // whose rounding noise would otherwise count as full rank.
        let restricted = hermitize(&(meet.adjoint() * k.matrix() * &meet));
        let scale = linalg::max_abs(k.matrix());
        linalg::rank_at_scale(&restricted, crate::RANK_TOL, scale) == meet.ncols()
    };
    Ok((image, regular))
}

/// Partial sums of the two squared-norm series in the multiplicity
/// demonstration: `(Σ_{n≤N} 1, Σ_{n≤N} 1/n²)`.
#[must_use]
pub fn multiplicity_partial_sums(n: usize) -> (f64, f64) {
    let s_one = n as f64;
    let s_two = (1..=n).map(|k| 1.0 / (k as f64 * k as f64)).sum();
    (s_one, s_two)
}

/// Two direct sums over the same Hermitian kernel with different norms.
///
/// Every summand carries the kernel `[[0,1],[1,0]]`. The first family uses
/// the symmetry `[[0,1],[1,0]]` (so `‖e₁‖² = 1` per summand); the second
/// uses `[[0, n²],[1/n², 0]]` (so `‖e₁‖² = 1/n²`). The vector `e₁⊕e₁⊕…` has
/// divergent squared norm in the first sum and a convergent one in the
/// second, although both sums present the identical kernel.
pub fn demo_multiplicity(n: usize) -> Result<Report> {
    if n == 0 {
        return Err(KreinError::Invalid(
            "the truncation order must be at least 1".into(),
        ));
    }
    let shared = to_complex(&RMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    let space = IndefiniteSpace::with_default_tol(shared.clone())?;

    // Both symmetry families must actually be fundamental for the shared
    // kernel; checked explicitly for the first summands.
    let mut symmetries_ok = true;
    for m in 1..=n.min(8) {
        let s = (m * m) as f64;
        let j_second = to_complex(&RMatrix::from_row_slice(2, 2, &[0.0, s, 1.0 / s, 0.0]));
        if crate::space::FundamentalSymmetry::new(&space, j_second).is_err() {
            symmetries_ok = false;
        }
    }
    let j_first = space.canonical_symmetry()?;
    debug_assert_eq!(j_first.signature(), (1, 1));

    let sums_one: Vec<f64> = (1..=n).map(|k| multiplicity_partial_sums(k).0).collect();
    let sums_two: Vec<f64> = (1..=n).map(|k| multiplicity_partial_sums(k).1).collect();
    let (s_one, s_two) = (sums_one[n - 1], sums_two[n - 1]);

    // Divergence: least-squares slope of the partial sums exceeds 1/2.
    let divergent = if n >= 2 {
        let mean_k = (n as f64 + 1.0) / 2.0;
        let mean_s = sums_one.iter().sum::<f64>() / n as f64;
        let num: f64 = (1..=n)
            .map(|k| (k as f64 - mean_k) * (sums_one[k - 1] - mean_s))
            .sum();
        let den: f64 = (1..=n).map(|k| (k as f64 - mean_k).powi(2)).sum();
        num / den > 0.5
    } else {
        false
    };
    // Convergence: the last-decade increment is below 1% of the value.
    let convergent = {
        let earlier = (9 * n) / 10;
        let base = if earlier == 0 {
            0.0
        } else {
            sums_two[earlier - 1]
        };
        earlier > 0 && (s_two - base) < 1e-2 * s_two
    };

    let mut report = Report::new("multiplicity demo");
    report.int("summands", n as i64);
    report.matrix("shared_kernel", shared);
    report.text("first_sum_symmetry", "[[0,1],[1,0]] on every summand");
    report.text("second_sum_symmetry", "[[0,n^2],[1/n^2,0]] on summand n");
    report.bool("symmetries_fundamental", symmetries_ok);
    report.text("summand_norm_sq_first", "1");
    report.text("summand_norm_sq_second", "1/n^2");
    report.float("partial_sum_first", s_one);
    report.float("partial_sum_second", s_two);
    report.bool("first_divergent", divergent);
    report.bool("second_convergent", convergent);
    report.float(
        "second_limit",
        std::f64::consts::PI * std::f64::consts::PI / 6.0,
    );
    Ok(report)
}
