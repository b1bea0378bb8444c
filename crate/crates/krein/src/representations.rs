//! Matrix group actions on indefinite spaces and kernels.
//!
//! Provides generator factories (hyperbolic boosts, rotations, shear actions
//! with nilpotent commutant, induced actions on homogeneous polynomials),
//! invariance tests for operators and kernel functions, commutant bases,
//! spectral analysis of form-self-adjoint commutant elements, and an
//! irreducibility/degeneracy classifier whose every `false` verdict carries a
//! certificate that re-verifies independently.
//!
//! Real inputs are processed over the reals: commutant bases, self-adjoint
//! spans, and witness searches then use real coefficients, so verdicts for
//! real actions are verdicts about real invariant structure.

use crate::linalg::{self, cr, hermitize, identity, is_real, max_abs, real_part, to_complex};
use crate::report::Report;
use crate::space::{FundamentalSymmetry, IndefiniteSpace, Subspace};
use crate::{CMatrix, KreinError, RMatrix, RVector, Result, Scalar, Trilean, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Hyperbolic rotation in the (1,2) plane of ℝ³.
#[must_use]
pub fn boost12(theta: f64) -> RMatrix {
    let (ch, sh) = (theta.cosh(), theta.sinh());
    RMatrix::from_row_slice(3, 3, &[ch, sh, 0.0, sh, ch, 0.0, 0.0, 0.0, 1.0])
}

/// Hyperbolic rotation in the (1,3) plane of ℝ³.
#[must_use]
pub fn boost13(theta: f64) -> RMatrix {
    let (ch, sh) = (theta.cosh(), theta.sinh());
    RMatrix::from_row_slice(3, 3, &[ch, 0.0, sh, 0.0, 1.0, 0.0, sh, 0.0, ch])
}

/// Euclidean rotation in the (2,3) plane of ℝ³.
#[must_use]
pub fn rot23(theta: f64) -> RMatrix {
    let (c, s) = (theta.cos(), theta.sin());
    RMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c])
}

/// The half-turn in the (2,3) plane, written exactly: diag(1, −1, −1).
/// It preserves the Minkowski form and is simultaneously its fundamental
/// symmetry, which makes the standard action below fundamental.
#[must_use]
pub fn half_turn23() -> RMatrix {
    RMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0])
}

/// A sampled element of the identity component of the Minkowski isometry
/// group of ℝ³: product of two boosts and a rotation with random parameters.
pub fn so12_sample(rng: &mut impl Rng) -> RMatrix {
    let a = rng.gen_range(-1.0..=1.0);
    let b = rng.gen_range(-1.0..=1.0);
    let c = rng.gen_range(-std::f64::consts::PI..=std::f64::consts::PI);
    boost12(a) * boost13(b) * rot23(c)
}

/// Random point pairs in `[-halfwidth, halfwidth]^dim` for kernel-invariance
/// sampling.
pub fn sample_point_pairs(
    rng: &mut impl Rng,
    count: usize,
    dim: usize,
    halfwidth: f64,
) -> Vec<(RVector, RVector)> {
    (0..count)
        .map(|_| {
            let mut p = || RVector::from_fn(dim, |_, _| rng.gen_range(-halfwidth..=halfwidth));
            (p(), p())
        })
        .collect()
}

/// A group of invertible matrices given by finitely many generators.
#[derive(Debug, Clone)]
pub struct GroupAction {
    generators: Vec<CMatrix>,
    fundamental_element: Option<usize>,
    point_action: bool,
}

impl GroupAction {
    /// Wraps a nonempty list of same-size invertible generators.
    pub fn new(generators: Vec<CMatrix>) -> Result<Self> {
        if generators.is_empty() {
            return Err(KreinError::Invalid(
                "at least one generator is required".into(),
            ));
        }
        let d = generators[0].nrows();
        for (i, g) in generators.iter().enumerate() {
            if g.nrows() != d || g.ncols() != d {
                return Err(KreinError::DimensionMismatch(format!(
                    "generator {i} is {}x{}, expected {d}x{d}",
                    g.nrows(),
                    g.ncols()
                )));
            }
            let sv = linalg::singular_values(g);
            let (smax, smin) = (sv[0], sv[sv.len() - 1]);
            if smin <= crate::RANK_TOL * smax {
                return Err(KreinError::Invalid(format!(
                    "generator {i} is numerically singular"
                )));
            }
        }
        Ok(GroupAction {
            generators,
            fundamental_element: None,
            point_action: false,
        })
    }

    /// Builds an action from real generators.
    pub fn from_real(generators: Vec<RMatrix>) -> Result<Self> {
        GroupAction::new(generators.iter().map(to_complex).collect())
    }

    /// Marks the generator at `index` as a designated fundamental symmetry
    /// (validated against a space inside the analyses that need it).
    pub fn with_fundamental(mut self, index: usize) -> Result<Self> {
        if index >= self.generators.len() {
            return Err(KreinError::IndexOutOfBounds {
                index,
                len: self.generators.len(),
            });
        }
        self.fundamental_element = Some(index);
        Ok(self)
    }

    /// Declares that the generators also act on sample points.
    #[must_use]
    pub fn with_point_action(mut self) -> Self {
        self.point_action = true;
        self
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.generators[0].nrows()
    }

    #[must_use]
    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    #[must_use]
    pub fn fundamental_element(&self) -> Option<usize> {
        self.fundamental_element
    }

    #[must_use]
    pub fn acts_on_points(&self) -> bool {
        self.point_action
    }

    /// True when every generator is real: analyses then stay over ℝ.
    #[must_use]
    pub fn is_real(&self) -> bool {
        self.generators.iter().all(|g| is_real(g, 1e-13))
    }

    /// The generator as a real matrix, for acting on sample points.
    pub fn point_generator(&self, index: usize) -> Result<RMatrix> {
        let g = self
            .generators
            .get(index)
            .ok_or(KreinError::IndexOutOfBounds {
                index,
                len: self.generators.len(),
            })?;
        if !is_real(g, 1e-12) {
            return Err(KreinError::Invalid(format!(
                "generator {index} is not real and cannot act on real points"
            )));
        }
        Ok(real_part(g))
    }
}

/// The standard Minkowski action on ℝ³: two boosts, a rotation at an
/// irrational angle, and the exact half-turn diag(1, −1, −1) as designated
/// fundamental element.
#[must_use]
pub fn so12_standard_action() -> GroupAction {
    let gens = vec![
        boost12(1.0),
        boost13(0.7),
        rot23(std::f64::consts::SQRT_2 - 1.0),
        half_turn23(),
    ];
    GroupAction::from_real(gens)
        .expect("standard generators are invertible")
        .with_fundamental(3)
        .expect("index in range")
        .with_point_action()
}

/// Shear action on ℂ^(2m) (m = `dim_h`, even): one generator
/// `[[I, B₀], [0, I]]` with `B₀` antisymmetric, `B₀² = −I`. Its commutant
/// contains nilpotent elements; the natural Gram is `[[0, I], [I, 0]]`.
pub fn shear_action(dim_h: usize) -> Result<GroupAction> {
    if dim_h == 0 || !dim_h.is_multiple_of(2) {
        return Err(KreinError::Invalid(
            "the shear action needs a positive even block dimension".into(),
        ));
    }
    let mut b0 = RMatrix::zeros(dim_h, dim_h);
    for k in 0..dim_h / 2 {
        b0[(2 * k, 2 * k + 1)] = 1.0;
        b0[(2 * k + 1, 2 * k)] = -1.0;
    }
    let mut t = RMatrix::identity(2 * dim_h, 2 * dim_h);
    t.view_mut((0, dim_h), (dim_h, dim_h)).copy_from(&b0);
    GroupAction::from_real(vec![t])
}

/// The Gram matrix `[[0, I], [I, 0]]` that pairs the two blocks of the
/// shear action.
#[must_use]
pub fn shear_gram(dim_h: usize) -> CMatrix {
    let mut g = CMatrix::zeros(2 * dim_h, 2 * dim_h);
    for k in 0..dim_h {
        g[(k, dim_h + k)] = cr(1.0);
        g[(dim_h + k, k)] = cr(1.0);
    }
    g
}

/// Exponent vectors of the degree-`degree` monomials in `dim` variables,
/// ordered graded-lexicographically (lexicographic descending within the
/// fixed degree), e.g. `x² > xy > y²`.
#[must_use]
pub fn monomial_exponents(dim: usize, degree: usize) -> Vec<Vec<usize>> {
    if dim == 0 {
        return if degree == 0 { vec![vec![]] } else { vec![] };
    }
    if dim == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in (0..=degree).rev() {
        for rest in monomial_exponents(dim - 1, degree - first) {
            let mut e = Vec::with_capacity(dim);
            e.push(first);
            e.extend(rest);
            out.push(e);
        }
    }
    out
}

/// Number of degree-`degree` monomials in `dim` variables.
#[must_use]
pub fn monomial_count(dim: usize, degree: usize) -> usize {
    monomial_exponents(dim, degree).len()
}

/// Matrix of the substitution action `f ↦ f ∘ g⁻¹` on homogeneous
/// polynomials of the given degree, in the monomial basis of
/// [`monomial_exponents`]. Satisfies `ρ(gh) = ρ(g)ρ(h)` and `ρ(I) = I`;
/// at degree 1 it is `(g⁻¹)ᵀ`.
pub fn poly_representation(g: &CMatrix, degree: usize) -> Result<CMatrix> {
    if g.nrows() != g.ncols() {
        return Err(KreinError::DimensionMismatch(format!(
            "generator is {}x{}",
            g.nrows(),
            g.ncols()
        )));
    }
    let d = g.nrows();
    let g_inv = linalg::inverse(g)
        .map_err(|_| KreinError::Invalid("polynomial action of a singular matrix".into()))?;
    let exps = monomial_exponents(d, degree);
    let index: BTreeMap<&Vec<usize>, usize> =
        exps.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let m = exps.len();
    let mut rho = CMatrix::zeros(m, m);
    for (j, alpha) in exps.iter().enumerate() {
        // Expand Π_k (Σ_l g_inv[k,l]·x_l)^(alpha[k]).
        let mut poly: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
        poly.insert(vec![0; d], cr(1.0));
        for k in 0..d {
            for _ in 0..alpha[k] {
                let mut next: BTreeMap<Vec<usize>, Scalar> = BTreeMap::new();
                for (e, c) in &poly {
                    for l in 0..d {
                        let w = *c * g_inv[(k, l)];
                        if w.norm() == 0.0 {
                            continue;
                        }
                        let mut e2 = e.clone();
                        e2[l] += 1;
                        *next.entry(e2).or_insert_with(|| cr(0.0)) += w;
                    }
                }
                poly = next;
            }
        }
        for (e, c) in poly {
            rho[(index[&e], j)] = c;
        }
    }
    Ok(rho)
}

/// Applies [`poly_representation`] to every generator, keeping the
/// designated fundamental index.
pub fn poly_action(base: &GroupAction, degree: usize) -> Result<GroupAction> {
    let gens = base
        .generators()
        .iter()
        .map(|g| poly_representation(g, degree))
        .collect::<Result<Vec<_>>>()?;
    let mut action = GroupAction::new(gens)?;
    if let Some(i) = base.fundamental_element() {
        action = action.with_fundamental(i)?;
    }
    Ok(action)
}

/// Residual verdict for `T K T† = K`, relative to `‖K‖_max`.
pub fn check_operator_invariance(k: &CMatrix, t: &CMatrix, tol: f64) -> Result<Verdict> {
    if k.nrows() != k.ncols() || t.nrows() != t.ncols() || k.nrows() != t.nrows() {
        return Err(KreinError::DimensionMismatch(format!(
            "kernel is {}x{}, operator is {}x{}",
            k.nrows(),
            k.ncols(),
            t.nrows(),
            t.ncols()
        )));
    }
    let moved = t * k * t.adjoint();
    let scale = max_abs(k).max(1e-300);
    Ok(Verdict::new(linalg::max_abs_diff(&moved, k) / scale, tol))
}

/// Max residual of `k(gx, gy) = k(x, y)` over sample pairs; the verdict
/// compares against `tol·max|k|` over the sample.
pub fn check_kernel_invariance(
    kfun: &crate::kernels::KernelFunction,
    g: &RMatrix,
    pairs: &[(RVector, RVector)],
    tol: f64,
) -> Result<Verdict> {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in pairs {
        let before = kfun.eval(x, y)?;
        let after = kfun.eval(&(g * x), &(g * y))?;
        worst = worst.max((after - before).norm());
        scale = scale.max(before.norm());
    }
    Ok(Verdict::new(worst, tol * scale.max(1.0)))
}

/// Smallest `α` with `g H g† ⪯ αH`, or `None` when the moved range escapes
/// `range(H)` (no finite constant exists).
pub fn domination_constant(g: &CMatrix, h: &CMatrix) -> Result<Option<f64>> {
    if g.nrows() != h.nrows() || g.nrows() != g.ncols() || h.nrows() != h.ncols() {
        return Err(KreinError::DimensionMismatch(format!(
            "operator is {}x{}, kernel is {}x{}",
            g.nrows(),
            g.ncols(),
            h.nrows(),
            h.ncols()
        )));
    }
    let t = crate::RANK_TOL;
    let u = linalg::column_space(h, t);
    if u.ncols() == 0 {
        return Ok(Some(0.0));
    }
    let moved = g * h * g.adjoint();
    if !linalg::span_contains(&u, &linalg::column_space(&moved, t), t) {
        return Ok(None);
    }
    // On range(H): α = λ_max of R^{-1/2} S R^{-1/2} with R = U†HU, S = U†(gHg†)U.
    let r = hermitize(&(u.adjoint() * h * &u));
    let s = hermitize(&(u.adjoint() * &moved * &u));
    let r_eig = linalg::herm_eigen(&r);
    if r_eig.values[0] <= 0.0 {
        return Err(KreinError::NotPositive(r_eig.values[0]));
    }
    let r_inv_sqrt = r_eig.map(|v| 1.0 / v.sqrt());
    let m = hermitize(&(&r_inv_sqrt * &s * &r_inv_sqrt));
    let top = linalg::herm_eigen(&m).values.last().copied().unwrap_or(0.0);
    Ok(Some(top.max(0.0)))
}

/// Joint invariance of a dominated pair under every generator: `gKg† = K`
/// exactly and `gHg† ⪯ α_g H` for finite `α_g`.
#[derive(Debug, Clone)]
pub struct InvariantPairCheck {
    pub ok: bool,
    /// Per generator: `Some(α_g)` or `None` when unbounded.
    pub alphas: Vec<Option<f64>>,
    pub max_invariance_residual: f64,
}

pub fn is_invariant_pair(
    action: &GroupAction,
    k: &CMatrix,
    h: &CMatrix,
    tol: f64,
) -> Result<InvariantPairCheck> {
    let mut alphas = Vec::new();
    let mut worst = 0.0f64;
    let mut ok = true;
    for g in action.generators() {
        let inv = check_operator_invariance(k, g, tol)?;
        worst = worst.max(inv.residual);
        let alpha = domination_constant(g, h)?;
        if !inv.ok || alpha.is_none() {
            ok = false;
        }
        alphas.push(alpha);
    }
    Ok(InvariantPairCheck {
        ok,
        alphas,
        max_invariance_residual: worst,
    })
}

/// Basis of the joint fixed space `∩ ker(Mᵢ − I)`.
pub fn fixed_subspace(matrices: &[CMatrix], tol: f64) -> Result<Subspace> {
    if matrices.is_empty() {
        return Err(KreinError::Invalid("fixed space of an empty list".into()));
    }
    let d = matrices[0].nrows();
    for m in matrices {
        if m.nrows() != d || m.ncols() != d {
            return Err(KreinError::DimensionMismatch(
                "fixed-space matrices must be square and equally sized".into(),
            ));
        }
    }
    let mut stacked = CMatrix::zeros(d * matrices.len(), d);
    for (i, m) in matrices.iter().enumerate() {
        stacked
            .view_mut((i * d, 0), (d, d))
            .copy_from(&(m - identity(d)));
    }
    let ns = linalg::nullspace_auto(&stacked, tol.max(crate::RANK_TOL));
    Subspace::new(d, ns)
}

fn fro_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Gram–Schmidt over the Frobenius inner product, forcing `I/√d` to be the
/// first element (the identity always belongs to the spans this is used on).
/// With `real_coeffs` the projection coefficients are kept real, so real
/// spans stay real.
fn identity_first_basis(d: usize, mats: &[CMatrix], real_coeffs: bool) -> Vec<CMatrix> {
    let target = mats.len();
    let mut out: Vec<CMatrix> = vec![identity(d).scale(1.0 / (d as f64).sqrt())];
    for m in mats {
        let mut w = m.clone();
        for b in &out {
            let mut c = linalg::frobenius_product(b, &w);
            if real_coeffs {
                c = cr(c.re);
            }
            w -= b * c;
        }
        let n = fro_norm(&w);
        if n > 1e-9 {
            out.push(w.unscale(n));
        }
        if out.len() == target {
            break;
        }
    }
    out
}

/// Orthonormal basis of the commutant `{A : gA = Ag for all generators}`,
/// with `I/√d` first. Real actions get a real basis. When a space is given,
/// star-closedness (stability under the form adjoint) is certified.
#[derive(Debug, Clone)]
pub struct CommutantBasis {
    pub basis: Vec<CMatrix>,
    /// Certified only when a space was supplied.
    pub star_closed: Option<bool>,
    /// Worst `‖gB − Bg‖_max / max(1, ‖B‖_max)` over generators and basis
    /// elements — the certificate that this is a commutant basis.
    pub max_commutation_residual: f64,
}

impl CommutantBasis {
    #[must_use]
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

pub fn commutant_basis(
    action: &GroupAction,
    space: Option<&IndefiniteSpace>,
    tol: f64,
) -> Result<CommutantBasis> {
    let d = action.dim();
    let gens = action.generators();
    let eye = identity(d);
    let mut stacked = CMatrix::zeros(d * d * gens.len(), d * d);
    for (i, g) in gens.iter().enumerate() {
        // vec(gA − Ag) = (I⊗g − gᵀ⊗I)·vec(A), column-major vectorization.
        let block = eye.kronecker(g) - g.transpose().kronecker(&eye);
        stacked
            .view_mut((i * d * d, 0), (d * d, d * d))
            .copy_from(&block);
    }
    let ns = linalg::nullspace_auto(&stacked, crate::RANK_TOL);
    let raw: Vec<CMatrix> = (0..ns.ncols())
        .map(|j| linalg::unvectorize(&ns.column(j).into_owned(), d, d))
        .collect();
    let basis = identity_first_basis(d, &raw, action.is_real());
    if basis.len() != raw.len() {
        return Err(KreinError::Invalid(
            "commutant basis rotation lost dimensions".into(),
        ));
    }

    let mut worst = 0.0f64;
    for b in &basis {
        let scale = max_abs(b).max(1.0);
        for g in gens {
            worst = worst.max(linalg::max_abs_diff(&(g * b), &(b * g)) / scale);
        }
    }

    let star_closed = match space {
        None => None,
        Some(sp) => {
            let ctol = tol.max(1e-9);
            let mut closed = true;
            for b in &basis {
                let adj = sp.j_adjoint(b)?;
                let mut w = adj.clone();
                for e in &basis {
                    let c = linalg::frobenius_product(e, &adj);
                    w -= e * c;
                }
                if max_abs(&w) > ctol * max_abs(&adj).max(1.0) {
                    closed = false;
                }
            }
            Some(closed)
        }
    };

    Ok(CommutantBasis {
        basis,
        star_closed,
        max_commutation_residual: worst,
    })
}

/// Orthonormal basis (identity first) of the real-linear subspace
/// `{A ∈ span(basis) : metric·A Hermitian}`. With `metric = G` this is the
/// space of form-self-adjoint elements; with a Hilbert metric `H` it is the
/// `H`-self-adjoint part. In real mode the span is taken with real
/// coefficients; otherwise over real combinations of `basis ∪ i·basis`.
pub(crate) fn metric_selfadjoint_subbasis(
    basis: &[CMatrix],
    metric: &CMatrix,
    real_mode: bool,
) -> Vec<CMatrix> {
    if basis.is_empty() {
        return Vec::new();
    }
    let d = basis[0].nrows();
    let mut gens: Vec<CMatrix> = basis.to_vec();
    if !real_mode {
        gens.extend(basis.iter().map(|b| b * Scalar::new(0.0, 1.0)));
    }
    // Real-linear system: Re/Im entries of metric·A − (metric·A)† vanish.
    // The cutoff is anchored at the scale of metric·A: when every basis
    // element is already self-adjoint the system vanishes wholesale, and a
    // cutoff relative to its own noise would reject all solutions.
    let mut c = RMatrix::zeros(2 * d * d, gens.len());
    let mut scale = 0.0f64;
    for (j, b) in gens.iter().enumerate() {
        let gb = metric * b;
        scale = scale.max(max_abs(&gb));
        let f = &gb - gb.adjoint();
        for (idx, z) in f.iter().enumerate() {
            c[(2 * idx, j)] = z.re;
            c[(2 * idx + 1, j)] = z.im;
        }
    }
    let coeffs = linalg::nullspace_real_at_scale(&c, crate::RANK_TOL, scale.max(1e-300));
    let mats: Vec<CMatrix> = (0..coeffs.ncols())
        .map(|k| {
            let mut a = CMatrix::zeros(d, d);
            for (j, b) in gens.iter().enumerate() {
                a += b * cr(coeffs[(j, k)]);
            }
            a
        })
        .collect();
    identity_first_basis(d, &mats, true)
}

/// Spectral analysis of a form-self-adjoint operator.
#[derive(Debug, Clone)]
pub enum SchurOutcome {
    /// All eigenvalues cluster at one value: `A = λI + N`, `N^order ≈ 0`.
    SingleCluster {
        lambda: Scalar,
        nilpotent: CMatrix,
        order: usize,
    },
    /// Several spectral clusters: the associated spectral projections.
    /// Clusters are merged into conjugation-closed groups where possible, so
    /// the projections of a self-adjoint input are again self-adjoint.
    SpectralSplit {
        projections: Vec<CMatrix>,
        means: Vec<Scalar>,
    },
}

/// Analyzes a form-self-adjoint matrix: either `λI + nilpotent` or a
/// genuine spectral split with projections. Positive single-cluster
/// elements at `λ ≈ 0` are checked to square to zero.
pub fn schur_analyze(space: &IndefiniteSpace, a: &CMatrix, tol: f64) -> Result<SchurOutcome> {
    let sa = space.is_j_selfadjoint(a)?;
    if !sa.ok {
        return Err(KreinError::NotSelfAdjoint(sa.residual));
    }
    let d = a.nrows();
    let evs = linalg::eigenvalues(a)?;
    let scale = evs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
    // Defective eigenvalues are computed with error ~ ε^(1/k); the gap must
    // absorb that, so it is far looser than the verdict tolerance.
    let gap = tol.max(1e-7) * scale;
    let clusters = linalg::cluster_indices(&evs, gap);

    if clusters.len() == 1 {
        let lambda = evs.iter().sum::<Scalar>() / cr(d as f64);
        let nilpotent = a - identity(d) * lambda;
        let norm_n = max_abs(&nilpotent);
        let otol = tol.max(1e-9);
        let mut order = None;
        for k in 1..=d {
            let pw = linalg::matrix_power(&nilpotent, k);
            if max_abs(&pw) <= otol * norm_n.max(1.0).powi(k as i32) {
                order = Some(k);
                break;
            }
        }
        let order = order.ok_or_else(|| {
            KreinError::Invalid("single-cluster element is not nilpotent after the shift".into())
        })?;
        // A positive element with vanishing eigenvalues has square zero.
        let (psd, _) = linalg::psd_check(&(space.gram() * a), tol.max(1e-9));
        if psd && lambda.norm() <= otol * scale && order > 2 {
            return Err(KreinError::HypothesisFailed(format!(
                "positive nilpotent element has order {order} > 2"
            )));
        }
        return Ok(SchurOutcome::SingleCluster {
            lambda,
            nilpotent,
            order,
        });
    }

    // Merge clusters into conjugation-closed groups: the projection of a
    // conjugation-closed spectrum part of a self-adjoint element is itself
    // self-adjoint (it is a real-coefficient polynomial in the element).
    let means: Vec<Scalar> = clusters
        .iter()
        .map(|c| c.iter().map(|&i| evs[i]).sum::<Scalar>() / cr(c.len() as f64))
        .collect();
    let k = clusters.len();
    let mut group_of: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in 0..k {
            if i != j && (means[i] - means[j].conj()).norm() <= gap {
                let (a, b) = (group_of[i].min(group_of[j]), group_of[i].max(group_of[j]));
                for g in &mut group_of {
                    if *g == b {
                        *g = a;
                    }
                }
            }
        }
    }
    let mut group_ids: Vec<usize> = group_of.clone();
    group_ids.sort_unstable();
    group_ids.dedup();
    // If conjugation closure collapses everything into one group, fall back
    // to the raw clusters: the projections are still spectral, but callers
    // must certify self-adjointness before using them as witnesses.
    let groups: Vec<Vec<usize>> = if group_ids.len() >= 2 {
        group_ids
            .iter()
            .map(|&gid| (0..k).filter(|&i| group_of[i] == gid).collect())
            .collect()
    } else {
        (0..k).map(|i| vec![i]).collect()
    };

    let mut columns: Vec<CMatrix> = Vec::new();
    let mut group_means = Vec::new();
    for group in &groups {
        // Generalized eigenspace of the group: kernel of Π (A − μ_r)^(m_r).
        let mut p = identity(d);
        for &r in group {
            let factor = a - identity(d) * means[r];
            p *= linalg::matrix_power(&factor, clusters[r].len());
        }
        let v = linalg::nullspace_auto(&p, crate::RANK_TOL);
        let total: usize = group.iter().map(|&r| clusters[r].len()).sum();
        if v.ncols() != total {
            return Err(KreinError::EigenFailed);
        }
        columns.push(v);
        let mean = group
            .iter()
            .map(|&r| means[r] * cr(clusters[r].len() as f64))
            .sum::<Scalar>()
            / cr(total as f64);
        group_means.push(mean);
    }
    let mut u = CMatrix::zeros(d, d);
    let mut offset = 0;
    for v in &columns {
        u.view_mut((0, offset), (d, v.ncols())).copy_from(v);
        offset += v.ncols();
    }
    if offset != d {
        return Err(KreinError::EigenFailed);
    }
    let u_inv = linalg::inverse(&u)?;
    let mut projections = Vec::new();
    let mut offset = 0;
    for v in &columns {
        let mut e = CMatrix::zeros(d, d);
        for t in offset..offset + v.ncols() {
            e[(t, t)] = cr(1.0);
        }
        projections.push(&u * e * &u_inv);
        offset += v.ncols();
    }
    Ok(SchurOutcome::SpectralSplit {
        projections,
        means: group_means,
    })
}

/// Summary of one spectral analysis, for reports.
#[derive(Debug, Clone)]
pub struct SchurSummary {
    /// `Some` when the element is `λI + nilpotent`.
    pub lambda: Option<Scalar>,
    pub order: Option<usize>,
    /// Number of spectral groups (1 for single-cluster elements).
    pub clusters: usize,
}

/// Outcome of the irreducibility and degeneracy analysis.
#[derive(Debug, Clone)]
pub struct IrreducibilityReport {
    /// Trivial commutant (scalars only).
    pub operator_irreducible: bool,
    /// No nontrivial form-self-adjoint idempotent commutes with the action.
    pub regularly_irreducible: Trilean,
    /// Certified witness when `regularly_irreducible` is false.
    pub reducibility_witness: Option<CMatrix>,
    /// Worst certificate residual of the witness (idempotency, commutation,
    /// self-adjointness).
    pub witness_residual: Option<f64>,
    /// No neutral invariant subspace; `Inconclusive` renders as `not-found`
    /// (the search is one-sided when the action is not fundamental).
    pub nondegenerate: Trilean,
    /// Basis of a neutral invariant subspace when `nondegenerate` is false.
    pub neutral_witness: Option<CMatrix>,
    /// Max entry of the form restricted to the neutral witness.
    pub neutral_witness_form_norm: Option<f64>,
    /// Some generator is a fundamental symmetry of the space.
    pub fundamental: bool,
    pub commutant_dim: usize,
    pub star_closed: bool,
    /// Whether the self-adjoint idempotent search was exhaustive.
    pub exhaustive: bool,
    /// Per self-adjoint basis element.
    pub schur: Vec<SchurSummary>,
}

const GRID_BUDGET: usize = 200_000;

/// Certifies a reducibility witness: idempotent, commutes with every
/// generator, self-adjoint for the form, nontrivial. Returns the worst
/// residual when certified.
fn certify_projection(
    space: &IndefiniteSpace,
    action: &GroupAction,
    p: &CMatrix,
    tol: f64,
) -> Option<f64> {
    let d = p.nrows();
    let scale = max_abs(p).max(1.0);
    if max_abs(p) <= tol || linalg::max_abs_diff(p, &identity(d)) <= tol {
        return None;
    }
    let mut worst = linalg::max_abs_diff(&(p * p), p) / scale;
    for g in action.generators() {
        worst = worst.max(linalg::max_abs_diff(&(g * p), &(p * g)) / scale);
    }
    let gp = space.gram() * p;
    worst = worst.max(linalg::hermitian_residual(&gp) / max_abs(&gp).max(1.0));
    (worst <= tol).then_some(worst)
}

/// Neutrality of a subspace: max entry of the restricted Gram.
fn neutral_residual(space: &IndefiniteSpace, basis: &CMatrix) -> f64 {
    max_abs(&(basis.adjoint() * space.gram() * basis))
}

fn is_invariant_span(action: &GroupAction, basis: &CMatrix, tol: f64) -> bool {
    action
        .generators()
        .iter()
        .all(|g| linalg::span_contains(basis, &(g * basis), tol))
}

/// All subspaces of joint eigenvectors, enumerated per eigenvalue tuple.
/// Every ray inside any returned subspace spans an invariant line, and every
/// invariant line arises this way. `None` when the enumeration exceeds the
/// budget.
fn joint_eigenray_subspaces(action: &GroupAction, tol: f64) -> Option<Vec<CMatrix>> {
    let d = action.dim();
    let mut spaces: Vec<CMatrix> = vec![identity(d)];
    for g in action.generators() {
        let evs = linalg::eigenvalues(g).ok()?;
        let gap = tol.max(1e-7) * evs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let clusters = linalg::cluster_indices(&evs, gap);
        let eigenspaces: Vec<CMatrix> = clusters
            .iter()
            .map(|c| {
                let mean = c.iter().map(|&i| evs[i]).sum::<Scalar>() / cr(c.len() as f64);
                linalg::nullspace(&(g - identity(d) * mean), 1e-8)
            })
            .filter(|v| v.ncols() > 0)
            .collect();
        let mut next = Vec::new();
        for v in &spaces {
            for e in &eigenspaces {
                let meet = linalg::span_intersection(v, e, crate::RANK_TOL);
                if meet.ncols() > 0 {
                    next.push(meet);
                }
            }
        }
        if next.len() > 4096 {
            return None;
        }
        spaces = next;
    }
    Some(spaces)
}

/// From a subspace on which the restricted form is not definite, extracts a
/// vector with vanishing self-form.
fn neutral_vector_in(space: &IndefiniteSpace, basis: &CMatrix) -> Option<CMatrix> {
    let r = hermitize(&(basis.adjoint() * space.gram() * basis));
    let eig = linalg::herm_eigen(&r);
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = space.tol().max(1e-10) * scale.max(1.0);
    let zero = eig.values.iter().position(|v| v.abs() <= cut);
    let coeff = if let Some(z) = zero {
        eig.vectors.column(z).into_owned()
    } else {
        let neg = eig.values.iter().position(|v| *v < 0.0)?;
        let pos = eig.values.iter().rposition(|v| *v > 0.0)?;
        // c₊/√λ₊ + c₋/√(−λ₋) has self-form 1 − 1 = 0.
        eig.vectors.column(pos).unscale(eig.values[pos].sqrt())
            + eig.vectors.column(neg).unscale((-eig.values[neg]).sqrt())
    };
    let v = CMatrix::from_column_slice(basis.nrows(), 1, (basis * coeff).as_slice());
    let n = fro_norm(&v);
    (n > 1e-12).then(|| v.unscale(n))
}

/// Classifies the action on the space: operator irreducibility from the
/// commutant dimension, regular irreducibility from a certificate-backed
/// search for self-adjoint idempotents in the commutant, and degeneracy
/// from a search for neutral invariant subspaces.
///
/// Every generator must preserve the form; a designated fundamental element
/// is validated. Real actions on real Grams are analyzed over the reals.
pub fn irreducibility_report(
    space: &IndefiniteSpace,
    action: &GroupAction,
    seed: u64,
) -> Result<IrreducibilityReport> {
    let tol = space.tol();
    for (index, g) in action.generators().iter().enumerate() {
        let v = space.is_j_unitary(g)?;
        if !v.ok {
            return Err(KreinError::NotJUnitary {
                index,
                residual: v.residual,
            });
        }
    }
    let real_mode = action.is_real() && is_real(space.gram(), 1e-13);
    let comm = commutant_basis(action, Some(space), tol)?;
    let operator_irreducible = comm.dim() == 1;

    // Fundamental: some generator is itself a fundamental symmetry.
    let fundamental = if let Some(i) = action.fundamental_element() {
        FundamentalSymmetry::new(space, action.generators()[i].clone()).map(|_| true)?
    } else {
        action
            .generators()
            .iter()
            .any(|g| FundamentalSymmetry::new(space, g.clone()).is_ok())
    };

    // Real-linear space of form-self-adjoint commutant elements, identity
    // first. Any self-adjoint idempotent in the commutant lies in this span.
    let sa = metric_selfadjoint_subbasis(&comm.basis, space.gram(), real_mode);
    let ctol = tol.max(1e-9);

    let mut schur = Vec::new();
    let mut witness: Option<(CMatrix, f64)> = None;
    let consider = |out: &SchurOutcome, witness: &mut Option<(CMatrix, f64)>| {
        if let SchurOutcome::SpectralSplit { projections, .. } = out {
            if witness.is_none() {
                for p in projections {
                    if let Some(r) = certify_projection(space, action, p, ctol) {
                        *witness = Some((p.clone(), r));
                        break;
                    }
                }
            }
        }
    };

    let mut nilpotent_parts: Vec<CMatrix> = Vec::new();
    for a in &sa {
        match schur_analyze(space, a, tol) {
            Ok(out) => {
                match &out {
                    SchurOutcome::SingleCluster {
                        lambda,
                        nilpotent,
                        order,
                    } => {
                        schur.push(SchurSummary {
                            lambda: Some(*lambda),
                            order: Some(*order),
                            clusters: 1,
                        });
                        if max_abs(nilpotent) > ctol {
                            nilpotent_parts.push(nilpotent.clone());
                        }
                    }
                    SchurOutcome::SpectralSplit { means, .. } => {
                        schur.push(SchurSummary {
                            lambda: None,
                            order: None,
                            clusters: means.len(),
                        });
                    }
                }
                consider(&out, &mut witness);
            }
            Err(_) => schur.push(SchurSummary {
                lambda: None,
                order: None,
                clusters: 0,
            }),
        }
    }

    // Seeded random combinations of the self-adjoint span (identity shifts
    // are irrelevant to splitting, so the identity direction is skipped).
    if witness.is_none() && sa.len() > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..32 {
            let mut a = CMatrix::zeros(space.dim(), space.dim());
            for s in &sa[1..] {
                a += s * cr(rng.gen_range(-1.0..=1.0));
            }
            if let Ok(out) = schur_analyze(space, &a, tol) {
                consider(&out, &mut witness);
            }
            if witness.is_some() {
                break;
            }
        }
    }

    // Exhaustive certification: every element of the self-adjoint span has a
    // single spectral cluster iff (A − (tr A / d)·I)^d vanishes; each entry
    // of that power is a polynomial of per-variable degree ≤ d in the span
    // coordinates, so vanishing on a (d+1)-point-per-variable grid proves
    // the identity. A failing grid point yields a splitting element.
    let d = space.dim();
    let m = sa.len().saturating_sub(1);
    let grid_size = (d + 1).checked_pow(m as u32);
    let grid_feasible = d <= 6 && grid_size.is_some_and(|s| s <= GRID_BUDGET);
    let mut exhaustive = operator_irreducible || m == 0;
    if witness.is_none() && !exhaustive && grid_feasible {
        let mut all_single = true;
        let mut index = vec![0usize; m];
        'grid: loop {
            let mut a = CMatrix::zeros(d, d);
            let mut nonzero = false;
            for (j, &t) in index.iter().enumerate() {
                let x = t as f64 - d as f64 / 2.0;
                if x != 0.0 {
                    nonzero = true;
                    a += &sa[j + 1] * cr(x);
                }
            }
            if nonzero {
                let trace: Scalar = a.diagonal().iter().sum();
                let n = &a - identity(d) * (trace / cr(d as f64));
                let pw = linalg::matrix_power(&n, d);
                if max_abs(&pw) > 1e-8 * max_abs(&n).max(1.0).powi(d as i32) {
                    all_single = false;
                    if let Ok(out) = schur_analyze(space, &a, tol) {
                        consider(&out, &mut witness);
                    }
                    break 'grid;
                }
            }
            // advance multi-index
            let mut j = 0;
            loop {
                if j == m {
                    break 'grid;
                }
                index[j] += 1;
                if index[j] <= d {
                    break;
                }
                index[j] = 0;
                j += 1;
            }
        }
        if all_single {
            exhaustive = true;
        }
    }

    let (regularly_irreducible, reducibility_witness, witness_residual) =
        match (&witness, exhaustive) {
            (Some((p, r)), _) => (Trilean::False, Some(p.clone()), Some(*r)),
            (None, true) => (Trilean::True, None, None),
            (None, false) => (Trilean::Inconclusive, None, None),
        };

    // Degeneracy: a fundamental element inside the group forbids neutral
    // invariant subspaces outright ([Jm, m] is a positive norm). Otherwise
    // scan invariant candidates for a vanishing restricted form.
    let mut nondegenerate = Trilean::Inconclusive;
    let mut neutral_witness = None;
    let mut neutral_witness_form_norm = None;
    if fundamental {
        nondegenerate = Trilean::True;
    } else {
        let ntol = tol.max(1e-10) * max_abs(space.gram()).max(1.0);
        let mut candidates: Vec<CMatrix> = Vec::new();
        if let Ok(fixed) = fixed_subspace(action.generators(), tol) {
            if fixed.dim() > 0 {
                candidates.push(fixed.basis().clone());
            }
        }
        for b in comm.basis.iter().skip(1) {
            candidates.push(linalg::column_space(b, crate::RANK_TOL));
            candidates.push(linalg::nullspace(b, crate::RANK_TOL));
        }
        for n in &nilpotent_parts {
            candidates.push(linalg::column_space(n, crate::RANK_TOL));
            candidates.push(linalg::nullspace(n, crate::RANK_TOL));
        }
        // Isotropic parts of invariant subspaces are invariant and neutral.
        let mut with_isotropic = candidates.clone();
        for c in &candidates {
            if let Ok(sub) = Subspace::new(d, c.clone()) {
                if let Ok(iso) = space.isotropic_part(&sub) {
                    if iso.dim() > 0 {
                        with_isotropic.push(iso.basis().clone());
                    }
                }
            }
        }
        for basis in &with_isotropic {
            if basis.ncols() == 0 || basis.ncols() >= d {
                continue;
            }
            if neutral_residual(space, basis) <= ntol && is_invariant_span(action, basis, ctol) {
                neutral_witness_form_norm = Some(neutral_residual(space, basis));
                neutral_witness = Some(basis.clone());
                nondegenerate = Trilean::False;
                break;
            }
        }
        if nondegenerate != Trilean::False {
            // Every invariant line is spanned by a joint eigenvector; if the
            // form is definite on every joint eigenspace, no neutral
            // invariant line exists.
            match joint_eigenray_subspaces(action, tol) {
                Some(spaces) => {
                    let mut found = None;
                    for v in &spaces {
                        if let Some(w) = neutral_vector_in(space, v) {
                            if neutral_residual(space, &w) <= ntol
                                && is_invariant_span(action, &w, ctol)
                            {
                                found = Some(w);
                                break;
                            }
                        }
                    }
                    match found {
                        Some(w) => {
                            neutral_witness_form_norm = Some(neutral_residual(space, &w));
                            neutral_witness = Some(w);
                            nondegenerate = Trilean::False;
                        }
                        None if operator_irreducible => nondegenerate = Trilean::True,
                        None => nondegenerate = Trilean::Inconclusive,
                    }
                }
                None => nondegenerate = Trilean::Inconclusive,
            }
        }
    }

    Ok(IrreducibilityReport {
        operator_irreducible,
        regularly_irreducible,
        reducibility_witness,
        witness_residual,
        nondegenerate,
        neutral_witness,
        neutral_witness_form_norm,
        fundamental,
        commutant_dim: comm.dim(),
        star_closed: comm.star_closed.unwrap_or(false),
        exhaustive,
        schur,
    })
}

impl IrreducibilityReport {
    /// Renders the classification with its certificates.
    #[must_use]
    pub fn to_report(&self) -> Report {
        let mut r = Report::new("irreducibility");
        r.int("commutant_dim", self.commutant_dim as i64);
        r.bool("star_closed", self.star_closed);
        r.bool("operator_irreducible", self.operator_irreducible);
        r.bool("fundamental", self.fundamental);
        r.trilean("regularly_irreducible", self.regularly_irreducible);
        r.bool("exhaustive_search", self.exhaustive);
        if let Some(p) = &self.reducibility_witness {
            r.matrix("reducibility_witness", p.clone());
        }
        if let Some(res) = self.witness_residual {
            r.float("witness_residual", res);
        }
        match self.nondegenerate {
            Trilean::Inconclusive => r.text("nondegenerate", "not-found"),
            t => r.trilean("nondegenerate", t),
        }
        if let Some(w) = &self.neutral_witness {
            r.matrix("neutral_witness", w.clone());
        }
        if let Some(n) = self.neutral_witness_form_norm {
            r.float("neutral_witness_form_norm", n);
        }
        let mut items = Vec::new();
        for (i, s) in self.schur.iter().enumerate() {
            let mut sub = Report::new(format!("selfadjoint element {i}"));
            match (s.lambda, s.order) {
                (Some(l), Some(o)) => {
                    sub.float("lambda_re", l.re);
                    sub.float("lambda_im", l.im);
                    sub.int("nilpotency_order", o as i64);
                }
                _ => {
                    sub.int("spectral_clusters", s.clusters as i64);
                }
            }
            items.push(sub);
        }
        r.list("schur_analysis", items);
        r
    }
}
