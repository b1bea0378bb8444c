//! Decomposition of invariant kernel pairs.
//!
//! A Hermitian kernel `K` dominated by a positive kernel `H = JK` under an
//! isomorphism `J` that fixes every invariant kernel splits into a direct
//! sum of invariant pairs `(K_t, H_t)` along projections drawn from the
//! commutant of the action. All structural postconditions — exact sum,
//! `H_t = J K_t`, pairwise independence, minimality, invariance, and the
//! Parseval identity — are re-verified on the result rather than assumed.
//!
//! The sum is finite with unit weights: at finite dimension every split
//! into extreme directions terminates, so no integral machinery is needed.

use crate::kernels::{self, HermitianKernel, KernelFunction};
use crate::linalg::{self, cr, hermitize, identity, is_real, max_abs, to_complex};
use crate::report::Report;
use crate::representations::{
    self, metric_selfadjoint_subbasis, sample_point_pairs, so12_sample, GroupAction,
    IrreducibilityReport,
};
use crate::space::IndefiniteSpace;
use crate::{CMatrix, CVector, KreinError, RVector, Result, Scalar, Trilean};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A Hermitian kernel `v` dominated by a positive kernel `c`:
/// `−c ⪯ v ⪯ c`.
#[derive(Debug, Clone)]
pub struct DominatedPair {
    v: CMatrix,
    c: CMatrix,
    tol: f64,
}

impl DominatedPair {
    /// Validates the domination `−c ⪯ v ⪯ c` (both `c − v` and `c + v`
    /// positive semidefinite within tol).
    pub fn new(v: CMatrix, c: CMatrix, tol: f64) -> Result<Self> {
        if v.nrows() != v.ncols() || v.nrows() != c.nrows() || c.nrows() != c.ncols() {
            return Err(KreinError::DimensionMismatch(format!(
                "kernel is {}x{}, majorant is {}x{}",
                v.nrows(),
                v.ncols(),
                c.nrows(),
                c.ncols()
            )));
        }
        let hv = linalg::hermitian_residual(&v);
        let scale = max_abs(&v).max(max_abs(&c)).max(1.0);
        if hv > tol * scale {
            return Err(KreinError::NotHermitian { residual: hv, tol });
        }
        let v = hermitize(&v);
        let c = hermitize(&c);
        for m in [&c - &v, &c + &v] {
            let (ok, residual) = linalg::psd_within(&m, tol, scale);
            if !ok {
                return Err(KreinError::HypothesisFailed(format!(
                    "domination fails: negative eigenvalue residual {residual:.3e}"
                )));
            }
        }
        Ok(DominatedPair { v, c, tol })
    }

    #[must_use]
    pub fn kernel(&self) -> &CMatrix {
        &self.v
    }

    #[must_use]
    pub fn majorant(&self) -> &CMatrix {
        &self.c
    }

    /// Minimality of the majorant: `c − v` and `c + v` have independent
    /// ranges (rank additivity).
    #[must_use]
    pub fn is_minimal(&self) -> bool {
        kernels::independent_matrices(&(&self.c - &self.v), &(&self.c + &self.v))
    }
}

/// Both minimality verdicts of an ordered pair of dominated pairs.
#[derive(Debug, Clone, Copy)]
pub struct HeredityCheck {
    pub parent_minimal: bool,
    pub child_minimal: bool,
}

/// Checks that `child ⪯ parent` in the domination order and returns both
/// minimality verdicts. Minimality is hereditary: a minimal parent with a
/// non-minimal child is a numerical contradiction and reported as an error.
pub fn check_minimal_pair_heredity(
    parent: &DominatedPair,
    child: &DominatedPair,
) -> Result<HeredityCheck> {
    let tol = parent.tol.max(child.tol);
    let scale = max_abs(parent.majorant())
        .max(max_abs(parent.kernel()))
        .max(1.0);
    let dv = parent.kernel() - child.kernel();
    let dc = parent.majorant() - child.majorant();
    for m in [&dc - &dv, &dc + &dv] {
        let (ok, residual) = linalg::psd_within(&m, tol, scale);
        if !ok {
            return Err(KreinError::OrderViolated(format!(
                "parent − child is not a dominated pair (residual {residual:.3e})"
            )));
        }
    }
    let check = HeredityCheck {
        parent_minimal: parent.is_minimal(),
        child_minimal: child.is_minimal(),
    };
    if check.parent_minimal && !check.child_minimal {
        return Err(KreinError::HypothesisFailed(
            "minimality heredity violated: minimal parent with non-minimal child".into(),
        ));
    }
    Ok(check)
}

/// Splits the majorant into the canonical minimal one plus excess:
/// `c = |v| + h`. Errors when `c − |v|` is not positive semidefinite (the
/// majorant is incomparable with the canonical minimal one).
pub fn strip_excess(pair: &DominatedPair) -> Result<(DominatedPair, CMatrix)> {
    let d = linalg::matrix_abs(pair.kernel());
    let h = pair.majorant() - &d;
    let scale = max_abs(pair.majorant())
        .max(max_abs(pair.kernel()))
        .max(1.0);
    let (ok, residual) = linalg::psd_within(&h, pair.tol, scale);
    if !ok {
        return Err(KreinError::IncomparableMajorant(format!(
            "majorant minus spectral modulus has negative part {residual:.3e}"
        )));
    }
    let minimal = DominatedPair::new(pair.kernel().clone(), d, pair.tol)?;
    Ok((minimal, h))
}

/// Invariant-cone membership data: the action plus one domination bound per
/// generator.
#[derive(Debug, Clone)]
pub struct InvariantConeSpec {
    pub action: GroupAction,
    pub lambdas: Vec<f64>,
}

impl InvariantConeSpec {
    /// Records the per-generator domination constants of an invariant pair.
    pub fn from_pair(action: GroupAction, k: &CMatrix, h: &CMatrix, tol: f64) -> Result<Self> {
        let check = representations::is_invariant_pair(&action, k, h, tol)?;
        if !check.ok {
            return Err(KreinError::HypothesisFailed(
                "pair is not invariant under the action".into(),
            ));
        }
        let lambdas = check
            .alphas
            .iter()
            .map(|a| a.expect("finite by the check above"))
            .collect();
        Ok(InvariantConeSpec { action, lambdas })
    }

    /// Membership: `k` invariant and `h` dominated within the recorded
    /// bounds (up to a small relative slack).
    pub fn contains(&self, k: &CMatrix, h: &CMatrix, tol: f64) -> Result<bool> {
        let check = representations::is_invariant_pair(&self.action, k, h, tol)?;
        if !check.ok {
            return Ok(false);
        }
        Ok(check
            .alphas
            .iter()
            .zip(&self.lambdas)
            .all(|(a, l)| a.is_some_and(|a| a <= l * (1.0 + 1e-6) + tol)))
    }
}

/// The two verified clauses of the structure hypothesis for `(K, J)`:
/// `(K, JK)` is a minimal dominated pair, and conjugation by `J` fixes
/// every invariant Hermitian kernel.
#[derive(Debug, Clone)]
pub struct FSHypothesis {
    pub j: CMatrix,
    pub pair_minimal: bool,
    pub commutes_with_invariants: bool,
    /// Real dimension of the computed space of invariant Hermitian kernels.
    pub invariant_dim: usize,
    /// Worst `‖JLJ† − L‖` over the invariant-kernel basis, relative.
    pub max_conjugation_residual: f64,
}

impl FSHypothesis {
    #[must_use]
    pub fn verified(&self) -> bool {
        self.pair_minimal && self.commutes_with_invariants
    }

    #[must_use]
    pub fn to_report(&self) -> Report {
        let mut r = Report::new("fs-hypothesis");
        r.bool("pair_minimal", self.pair_minimal);
        r.bool("commutes_with_invariants", self.commutes_with_invariants);
        r.int("invariant_kernel_dim", self.invariant_dim as i64);
        r.float("max_conjugation_residual", self.max_conjugation_residual);
        r
    }
}

/// Orthonormal real basis of the invariant Hermitian kernels
/// `𝒰 = {L = L† : gLg† = L for all generators}`.
pub fn invariant_kernel_basis(action: &GroupAction, _tol: f64) -> Vec<CMatrix> {
    let d = action.dim();
    let gens = action.generators();
    let mut stacked = CMatrix::zeros(d * d * gens.len(), d * d);
    for (i, g) in gens.iter().enumerate() {
        // vec(gLg†) = (conj(g) ⊗ g)·vec(L), column-major vectorization.
        let block = g.conjugate().kronecker(g) - identity(d * d);
        stacked
            .view_mut((i * d * d, 0), (d * d, d * d))
            .copy_from(&block);
    }
    let ns = linalg::nullspace_auto(&stacked, crate::RANK_TOL);
    // Hermitian real-linear parts of the fixed space, orthonormalized.
    let mut candidates = Vec::new();
    for j in 0..ns.ncols() {
        let l = linalg::unvectorize(&ns.column(j).into_owned(), d, d);
        candidates.push((&l + l.adjoint()).scale(0.5));
        candidates.push((&l - l.adjoint()) * Scalar::new(0.0, -0.5));
    }
    let mut basis: Vec<CMatrix> = Vec::new();
    for m in candidates {
        let mut w = m;
        for b in &basis {
            let c = cr(linalg::frobenius_product(b, &w).re);
            w -= b * c;
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-9 {
            basis.push(w.unscale(n));
        }
    }
    basis
}

/// Verifies the structure hypothesis for `(K, J)` under the action:
/// (a) `JK` positive and `(K, JK)` minimal; (b) `JLJ† = L` on a computed
/// basis of the invariant Hermitian kernels.
pub fn verify_fs(k: &CMatrix, j: &CMatrix, action: &GroupAction, tol: f64) -> Result<FSHypothesis> {
    if k.nrows() != k.ncols() || j.nrows() != j.ncols() || k.nrows() != j.nrows() {
        return Err(KreinError::DimensionMismatch(format!(
            "kernel is {}x{}, isomorphism is {}x{}",
            k.nrows(),
            k.ncols(),
            j.nrows(),
            j.ncols()
        )));
    }
    if k.nrows() != action.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "kernel is {}x{}, action dimension is {}",
            k.nrows(),
            k.ncols(),
            action.dim()
        )));
    }
    linalg::inverse(j)?;
    let h = hermitize(&(j * k));
    let (psd, _) = linalg::psd_within(&h, tol, max_abs(&h).max(max_abs(k)).max(1.0));
    let pair_minimal = psd
        && match minimal_pair_matrices(k, &h, tol) {
            Ok(minimal) => minimal,
            Err(KreinError::HypothesisFailed(_)) => false,
            Err(e) => return Err(e),
        };

    let basis = invariant_kernel_basis(action, tol);
    let mut worst = 0.0f64;
    for l in &basis {
        let moved = j * l * j.adjoint();
        worst = worst.max(linalg::max_abs_diff(&moved, l) / max_abs(l).max(1.0));
    }
    Ok(FSHypothesis {
        j: j.clone(),
        pair_minimal,
        commutes_with_invariants: worst <= tol.max(1e-9),
        invariant_dim: basis.len(),
        max_conjugation_residual: worst,
    })
}

/// One summand of a decomposition, in ambient coordinates.
#[derive(Debug, Clone)]
pub struct Component {
    pub kernel: CMatrix,
    pub majorant: CMatrix,
    pub weight: f64,
    pub rank: usize,
    /// Signature (positive, negative) of the kernel on its range.
    pub signature: (usize, usize),
    pub minimal: bool,
    pub invariant: bool,
    /// Per-generator domination constants of the component pair.
    pub alphas: Vec<Option<f64>>,
    /// `‖H_t − J K_t‖_max`.
    pub majorant_residual: f64,
    /// Classification of the action compressed to the component's range;
    /// absent when the action does not act on the component's coordinates
    /// (analytically graded components).
    pub irreducibility: Option<IrreducibilityReport>,
    /// Label for graded components (polynomial degree).
    pub degree: Option<usize>,
}

/// A verified decomposition `K = Σ m_t K_t`, `H_t = J K_t`.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub kernel: CMatrix,
    pub j: CMatrix,
    pub components: Vec<Component>,
    /// `‖K − Σ m_t K_t‖_max`.
    pub residual_sum: f64,
    /// Max normalized Parseval residual over sampled vector pairs.
    pub parseval_residual: f64,
    /// Rank-additivity table for all component pairs `(s, t)`; `None` marks
    /// pairs the point count cannot resolve.
    pub pairwise_independence: Vec<(usize, usize, Option<bool>)>,
    /// All applicable pairs independent.
    pub all_independent: bool,
    /// The split was forced: the splitting commutant is abelian.
    pub forced: bool,
    /// Some terminal component is not verified regularly irreducible.
    pub partial: bool,
}

/// Matrix-level minimality check, wrapping the validated kernel type.
fn minimal_pair_matrices(k: &CMatrix, h: &CMatrix, tol: f64) -> Result<bool> {
    let kk = HermitianKernel::new(k.clone(), tol.max(1e-9))?;
    let hh = HermitianKernel::new(h.clone(), tol.max(1e-9))?;
    kernels::is_minimal_pair(&kk, &hh, tol)
}

fn component_signature(k: &CMatrix, tol: f64) -> (usize, usize) {
    let eig = linalg::herm_eigen(&hermitize(k));
    let scale = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = tol.max(crate::RANK_TOL) * scale.max(1.0);
    let p = eig.values.iter().filter(|v| **v > cut).count();
    let q = eig.values.iter().filter(|v| **v < -cut).count();
    (p, q)
}

/// Recursive splitting state in the coordinates of one node.
struct SplitNode {
    gens: Vec<CMatrix>,
    k: CMatrix,
    j: CMatrix,
    /// Ambient embedding: ambient-dim × node-dim.
    embed: CMatrix,
}

fn split_recursively(
    node: SplitNode,
    tol: f64,
    seed: u64,
    depth: usize,
    out: &mut Vec<CMatrix>,
    partial: &mut bool,
) -> Result<()> {
    let d = node.k.nrows();
    if d == 0 {
        return Ok(());
    }
    // Compress onto the range of K; on a full-rank node keep coordinates as
    // they are so exact block structures pass through verbatim.
    let rank = linalg::rank(&node.k, crate::RANK_TOL);
    if rank == 0 {
        return Ok(());
    }
    if rank < d {
        let u = linalg::column_space_auto(&node.k, crate::RANK_TOL);
        let k = hermitize(&(u.adjoint() * &node.k * &u));
        let j = u.adjoint() * &node.j * &u;
        let gens = node
            .gens
            .iter()
            .map(|g| u.adjoint() * g * &u)
            .collect::<Vec<_>>();
        // Range stability certificates: both the action and J must map
        // range(K) into itself for the compression to be faithful.
        for g in &node.gens {
            if !linalg::span_contains(&u, &(g * &u), 1e-8) {
                return Err(KreinError::HypothesisFailed(
                    "action does not preserve the kernel range".into(),
                ));
            }
        }
        if !linalg::span_contains(&u, &(&node.j * &u), 1e-8) {
            return Err(KreinError::HypothesisFailed(
                "isomorphism does not preserve the kernel range".into(),
            ));
        }
        return split_recursively(
            SplitNode {
                gens,
                k,
                j,
                embed: &node.embed * u,
            },
            tol,
            seed,
            depth,
            out,
            partial,
        );
    }

    let emit = |out: &mut Vec<CMatrix>| {
        out.push(hermitize(&(&node.embed * &node.k * node.embed.adjoint())));
    };

    if depth >= 32 || out.len() >= 64 {
        *partial = true;
        emit(out);
        return Ok(());
    }

    // Split along the commutant of the star-closed envelope of the action
    // together with J: projections drawn there commute with every
    // generator, every adjoint, and J, which makes the components
    // invariant Hermitian pairs.
    let mut star_gens = node.gens.clone();
    star_gens.extend(node.gens.iter().map(CMatrix::adjoint));
    star_gens.push(node.j.clone());
    let star_action = GroupAction::new(star_gens.clone())?;
    let comm = representations::commutant_basis(&star_action, None, tol)?;
    if comm.dim() <= 1 {
        emit(out);
        return Ok(());
    }

    let h = hermitize(&(&node.j * &node.k));
    let chol = nalgebra::linalg::Cholesky::new(h.clone()).ok_or_else(|| {
        KreinError::HypothesisFailed("J·K is not positive definite on the kernel range".into())
    })?;
    let l_adj = chol.l().adjoint();
    let l_adj_inv = linalg::inverse(&l_adj)?;
    let real_mode = node.gens.iter().all(|g| is_real(g, 1e-13))
        && is_real(&node.k, 1e-13)
        && is_real(&node.j, 1e-13);
    let sa = metric_selfadjoint_subbasis(&comm.basis, &h, real_mode);
    let ctol = tol.max(1e-9);

    if sa.len() > 1 {
        for attempt in 0..4u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(linalg::sub_seed(seed, attempt));
            let mut s = CMatrix::zeros(d, d);
            for b in &sa[1..] {
                s += b * cr(rng.gen_range(-1.0..=1.0));
            }
            // Hermitian in the Hilbert geometry of H = LL†.
            let t = hermitize(&(&l_adj * &s * &l_adj_inv));
            let eig = linalg::herm_eigen(&t);
            let scale = eig.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            let gap = 1e-8 * scale;
            let mut groups: Vec<(usize, usize)> = Vec::new();
            let mut start = 0;
            for i in 1..=eig.values.len() {
                if i == eig.values.len() || eig.values[i] - eig.values[i - 1] > gap {
                    groups.push((start, i));
                    start = i;
                }
            }
            if groups.len() < 2 {
                continue;
            }
            let mut projections = Vec::new();
            let mut certified = true;
            for &(a, b) in &groups {
                let cols = eig.vectors.columns(a, b - a).into_owned();
                let pi = &cols * cols.adjoint();
                let p = &l_adj_inv * pi * &l_adj;
                let scale_p = max_abs(&p).max(1.0);
                let mut worst = linalg::max_abs_diff(&(&p * &p), &p) / scale_p;
                for g in &star_gens {
                    worst = worst.max(linalg::max_abs_diff(&(g * &p), &(&p * g)) / scale_p);
                }
                worst = worst.max(linalg::hermitian_residual(&(&node.k * &p)) / scale_p);
                worst = worst.max(linalg::hermitian_residual(&(&h * &p)) / scale_p);
                if worst > ctol {
                    certified = false;
                    break;
                }
                projections.push(p);
            }
            if !certified {
                continue;
            }
            for (index, p) in projections.iter().enumerate() {
                let k_part = hermitize(&(&node.k * p));
                split_recursively(
                    SplitNode {
                        gens: node.gens.clone(),
                        k: k_part,
                        j: node.j.clone(),
                        embed: node.embed.clone(),
                    },
                    tol,
                    linalg::sub_seed(seed, 1000 + index as u64),
                    depth + 1,
                    out,
                    partial,
                )?;
            }
            return Ok(());
        }
    }
    // Commutant is nontrivial but no certified split was found: terminal.
    emit(out);
    Ok(())
}

/// Classifies a component by compressing the action and `J` onto its range.
fn classify_component(
    action: &GroupAction,
    k: &CMatrix,
    j: &CMatrix,
    tol: f64,
    seed: u64,
) -> Result<Option<IrreducibilityReport>> {
    let rank = linalg::rank(k, crate::RANK_TOL);
    if rank == 0 {
        return Ok(None);
    }
    let d = k.nrows();
    let u = if rank == d {
        identity(d)
    } else {
        linalg::column_space_auto(k, crate::RANK_TOL)
    };
    let k_c = hermitize(&(u.adjoint() * k * &u));
    let j_c = u.adjoint() * j * &u;
    let mut gens: Vec<CMatrix> = action
        .generators()
        .iter()
        .map(|g| u.adjoint() * g * &u)
        .collect();
    gens.push(j_c.clone());
    let space = IndefiniteSpace::new(k_c, tol)?;
    let mut compressed = GroupAction::new(gens)?;
    if crate::space::FundamentalSymmetry::new(&space, j_c).is_ok() {
        compressed = compressed.with_fundamental(action.generators().len())?;
    }
    Ok(Some(representations::irreducibility_report(
        &space,
        &compressed,
        seed,
    )?))
}

fn pairwise_independence_table(
    components: &[Component],
    applicable: impl Fn(&Component, &Component) -> bool,
) -> (Vec<(usize, usize, Option<bool>)>, bool) {
    let mut table = Vec::new();
    let mut all = true;
    for s in 0..components.len() {
        for t in s + 1..components.len() {
            let entry = if applicable(&components[s], &components[t]) {
                let ok =
                    kernels::independent_matrices(&components[s].majorant, &components[t].majorant);
                if !ok {
                    all = false;
                }
                Some(ok)
            } else {
                None
            };
            table.push((s, t, entry));
        }
    }
    (table, all)
}

fn sort_components(components: &mut [Component]) {
    components.sort_by(|a, b| {
        let key = |c: &Component| (c.rank, c.signature.0, c.signature.1);
        key(a).cmp(&key(b)).then_with(|| {
            let round = |m: &CMatrix| {
                m.iter()
                    .flat_map(|z| [(z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64])
                    .collect::<Vec<_>>()
            };
            round(&a.kernel).cmp(&round(&b.kernel))
        })
    });
}

/// Decomposes an invariant pair `(K, H = JK)` into invariant Hermitian
/// components along projections from the commutant. Requires the structure
/// hypothesis to verify, `J` Hermitian, and every generator to both
/// preserve the form (`g†Kg = K`) and leave the kernel invariant
/// (`gKg† = K`).
pub fn decompose_invariant_pair(
    action: &GroupAction,
    k: &CMatrix,
    j: &CMatrix,
    tol: f64,
    seed: u64,
) -> Result<DecompositionResult> {
    if k.nrows() != action.dim() {
        return Err(KreinError::DimensionMismatch(format!(
            "kernel is {}x{}, action dimension is {}",
            k.nrows(),
            k.ncols(),
            action.dim()
        )));
    }
    let hk = linalg::hermitian_residual(k);
    if hk > tol * max_abs(k).max(1.0) {
        return Err(KreinError::NotHermitian { residual: hk, tol });
    }
    let k = hermitize(k);
    let jh = linalg::hermitian_residual(j);
    if jh > tol.max(1e-9) * max_abs(j).max(1.0) {
        return Err(KreinError::Invalid(
            "the isomorphism J must be Hermitian".into(),
        ));
    }
    let scale = max_abs(&k).max(1.0);
    // J must itself preserve the kernel so that it can be adjoined to the
    // action; the hypothesis is then verified for the augmented action,
    // under which its conjugation clause is meaningful even for small
    // groups (invariant kernels of the augmented action are J-fixed).
    let j_moves = linalg::max_abs_diff(&(j * &k * j.adjoint()), &k) / scale;
    if j_moves > tol.max(1e-9) {
        return Err(KreinError::HypothesisFailed(format!(
            "the isomorphism does not preserve the kernel (residual {j_moves:.3e})"
        )));
    }
    let mut augmented_gens = action.generators().to_vec();
    augmented_gens.push(j.clone());
    let augmented = GroupAction::new(augmented_gens)?;
    let fs = verify_fs(&k, j, &augmented, tol)?;
    if !fs.verified() {
        return Err(KreinError::HypothesisFailed(format!(
            "structure hypothesis fails: pair_minimal={}, commutes_with_invariants={}",
            fs.pair_minimal, fs.commutes_with_invariants
        )));
    }
    for (index, g) in action.generators().iter().enumerate() {
        let unit = linalg::max_abs_diff(&(g.adjoint() * &k * g), &k) / scale;
        let inv = linalg::max_abs_diff(&(g * &k * g.adjoint()), &k) / scale;
        if unit.max(inv) > tol.max(1e-9) {
            return Err(KreinError::NotJUnitary {
                index,
                residual: unit.max(inv),
            });
        }
    }

    // Forced split: abelian splitting commutant at the top level.
    let mut star_gens: Vec<CMatrix> = action.generators().to_vec();
    star_gens.extend(action.generators().iter().map(CMatrix::adjoint));
    star_gens.push(j.clone());
    let top_comm = representations::commutant_basis(&GroupAction::new(star_gens)?, None, tol)?;
    let mut forced = true;
    for a in &top_comm.basis {
        for b in &top_comm.basis {
            if linalg::max_abs_diff(&(a * b), &(b * a)) > tol.max(1e-9) {
                forced = false;
            }
        }
    }

    let mut raw = Vec::new();
    let mut partial = false;
    split_recursively(
        SplitNode {
            gens: action.generators().to_vec(),
            k: k.clone(),
            j: j.clone(),
            embed: identity(k.nrows()),
        },
        tol,
        seed,
        0,
        &mut raw,
        &mut partial,
    )?;

    let mut components = Vec::new();
    for (index, k_t) in raw.iter().enumerate() {
        let h_t = hermitize(&(j * k_t));
        let majorant_residual = linalg::max_abs_diff(&h_t, &(j * k_t));
        let rank = linalg::rank(k_t, crate::RANK_TOL);
        let signature = component_signature(k_t, tol);
        let minimal = match minimal_pair_matrices(k_t, &h_t, tol) {
            Ok(m) => m,
            Err(KreinError::HypothesisFailed(_)) => false,
            Err(e) => return Err(e),
        };
        let check = representations::is_invariant_pair(action, k_t, &h_t, tol.max(1e-9))?;
        let irreducibility = classify_component(
            action,
            k_t,
            j,
            tol,
            linalg::sub_seed(seed, 2000 + index as u64),
        )?;
        if let Some(rep) = &irreducibility {
            if rep.regularly_irreducible != Trilean::True {
                partial = true;
            }
        }
        components.push(Component {
            kernel: k_t.clone(),
            majorant: h_t,
            weight: 1.0,
            rank,
            signature,
            minimal,
            invariant: check.ok,
            alphas: check.alphas,
            majorant_residual,
            irreducibility,
            degree: None,
        });
    }
    sort_components(&mut components);

    let mut sum = CMatrix::zeros(k.nrows(), k.ncols());
    for c in &components {
        sum += &c.kernel * cr(c.weight);
    }
    let residual_sum = linalg::max_abs_diff(&sum, &k);
    let (pairwise_independence, all_independent) =
        pairwise_independence_table(&components, |_, _| true);

    let mut result = DecompositionResult {
        kernel: k,
        j: j.clone(),
        components,
        residual_sum,
        parseval_residual: 0.0,
        pairwise_independence,
        all_independent,
        forced,
        partial,
    };
    result.parseval_residual = verify_parseval(&result, 100, linalg::sub_seed(seed, 7));
    Ok(result)
}

/// Max normalized Parseval residual `|b†Ka − Σ_t m_t·b†K_t a|` over seeded
/// random vector pairs, scaled by `‖K‖·‖a‖·‖b‖`.
#[must_use]
pub fn verify_parseval(result: &DecompositionResult, trials: usize, seed: u64) -> f64 {
    let d = result.kernel.nrows();
    if d == 0 {
        return 0.0;
    }
    let real = is_real(&result.kernel, 1e-13)
        && result.components.iter().all(|c| is_real(&c.kernel, 1e-13));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale_k = max_abs(&result.kernel).max(1e-300);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let draw = |rng: &mut ChaCha8Rng| {
            CVector::from_fn(d, |_, _| {
                if real {
                    cr(rng.gen_range(-1.0..=1.0))
                } else {
                    Scalar::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
                }
            })
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let total = (b.adjoint() * &result.kernel * &a)[(0, 0)];
        let mut parts = Scalar::new(0.0, 0.0);
        for c in &result.components {
            parts += (b.adjoint() * &c.kernel * &a)[(0, 0)] * cr(c.weight);
        }
        let norm = scale_k * a.norm() * b.norm();
        worst = worst.max((total - parts).norm() / norm.max(1e-300));
    }
    worst
}

impl Component {
    #[must_use]
    pub fn to_report(&self, index: usize) -> Report {
        let mut r = Report::new(format!("component {index}"));
        if let Some(n) = self.degree {
            r.int("degree", n as i64);
        }
        r.int("rank", self.rank as i64);
        r.int("signature_plus", self.signature.0 as i64);
        r.int("signature_minus", self.signature.1 as i64);
        r.float("weight", self.weight);
        r.bool("minimal", self.minimal);
        r.bool("invariant", self.invariant);
        r.float("majorant_residual", self.majorant_residual);
        for (i, a) in self.alphas.iter().enumerate() {
            match a {
                Some(v) => r.float(format!("alpha_{i}"), *v),
                None => r.text(format!("alpha_{i}"), "unbounded"),
            }
        }
        if let Some(rep) = &self.irreducibility {
            r.nested("irreducibility", rep.to_report());
        }
        r.matrix("kernel", self.kernel.clone());
        r.matrix("majorant", self.majorant.clone());
        r
    }
}

impl DecompositionResult {
    #[must_use]
    pub fn to_report(&self) -> Report {
        let mut r = Report::new("decomposition");
        r.int("components", self.components.len() as i64);
        r.float("residual_sum", self.residual_sum);
        r.float("parseval_residual", self.parseval_residual);
        r.bool("all_independent", self.all_independent);
        r.bool("forced", self.forced);
        // A partial decomposition is not wrong, just unfinished: terminal
        // components lacking an irreducibility proof read as inconclusive.
        r.trilean(
            "fully_verified",
            if self.partial {
                Trilean::Inconclusive
            } else {
                Trilean::True
            },
        );
        let items: Vec<Report> = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| c.to_report(i))
            .collect();
        r.list("component_list", items);
        let mut pairs = Vec::new();
        for (s, t, v) in &self.pairwise_independence {
            let mut p = Report::new(format!("pair {s} {t}"));
            match v {
                Some(ok) => p.bool("independent", *ok),
                None => p.text("independent", "not-applicable"),
            }
            pairs.push(p);
        }
        r.list("independence", pairs);
        r
    }
}

/// Graded decomposition of the Lorentz exponential kernel on sampled
/// points: `K(x, y) = exp⟨Jx, y⟩` splits into the degree-`n` kernels
/// `K_n(x, y) = ⟨Jx, y⟩ⁿ/n!`, with majorants `H_n(x, y) = K_n(Jx, y)`.
/// Verifies the truncation against the analytic Taylor tail bound,
/// the functional identity `H_n(x, y) = K_n(Jx, y)`, invariance of every
/// graded kernel under sampled isometries, the generic rank law
/// `rank H_n = min(points, (n+1)(n+2)/2)`, pairwise independence where the
/// point count permits, and the Parseval identity.
pub fn lorentz_graded_demo(
    max_degree: usize,
    num_points: usize,
    halfwidth: f64,
    seed: u64,
) -> Result<(DecompositionResult, Report)> {
    if num_points == 0 {
        return Err(KreinError::Invalid("at least one sample point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<RVector> = (0..num_points)
        .map(|_| RVector::from_fn(3, |_, _| rng.gen_range(-halfwidth..=halfwidth)))
        .collect();
    let metric = kernels::minkowski_metric();
    let tol = crate::DEFAULT_TOL;

    let k_full = HermitianKernel::from_function(&KernelFunction::lorentz_exp(), &points, tol)?;
    let j_points = &metric;

    // Taylor tail: Σ_{n>N} Rⁿ/n! with R the largest sampled bilinear value.
    let mut r_max = 0.0f64;
    for x in &points {
        for y in &points {
            r_max = r_max.max((y.transpose() * j_points * x)[(0, 0)].abs());
        }
    }
    let mut tail_bound = 0.0f64;
    let mut term = 1.0f64;
    for n in 1..=max_degree {
        term *= r_max / n as f64;
    }
    for n in max_degree + 1..max_degree + 400 {
        term *= r_max / n as f64;
        tail_bound += term;
        if term < 1e-300 {
            break;
        }
    }

    let mut invariance_rng = ChaCha8Rng::seed_from_u64(linalg::sub_seed(seed, 11));
    let sampled_isometries: Vec<_> = (0..5).map(|_| so12_sample(&mut invariance_rng)).collect();
    let pairs = sample_point_pairs(&mut invariance_rng, 50, 3, halfwidth);

    let mut components = Vec::new();
    let mut report_items = Vec::new();
    let mut truncation_sum = CMatrix::zeros(num_points, num_points);
    let mut all_ok = true;
    for n in 0..=max_degree {
        let kfun = KernelFunction::lorentz_poly(n);
        let k_n = HermitianKernel::from_function(&kfun, &points, tol)?;
        // H_n(x, y) = K_n(Jx, y): evaluate the graded kernel at reflected
        // first arguments; this equals the Euclidean graded kernel.
        let mut h_n = CMatrix::zeros(num_points, num_points);
        let mut h_fun_residual = 0.0f64;
        let hfun = KernelFunction::dot_poly(n);
        for (i, x) in points.iter().enumerate() {
            for (jdx, y) in points.iter().enumerate() {
                let via_reflection = kfun.eval(&(j_points * x), y)?;
                let direct = hfun.eval(x, y)?;
                h_fun_residual = h_fun_residual.max((via_reflection - direct).norm());
                h_n[(i, jdx)] = direct;
            }
        }
        let h_n = hermitize(&h_n);
        truncation_sum += k_n.matrix();

        let binomial_rank = (n + 1) * (n + 2) / 2;
        let expected_rank = num_points.min(binomial_rank);
        let rank = linalg::rank(&h_n, crate::RANK_TOL);
        let rank_ok = rank == expected_rank;
        // Verdicts are asserted only where they are decidable: the sample
        // must hold at least as many points as the graded dimension (else
        // the rank saturates and minimality degenerates), and the graded
        // values must not have shrunk past double-precision rank resolution.
        let assertable = n <= 4 && binomial_rank <= num_points;
        let mut invariance_residual = 0.0f64;
        for g in &sampled_isometries {
            let v = representations::check_kernel_invariance(&kfun, g, &pairs, 1e-8)?;
            invariance_residual = invariance_residual.max(v.residual);
        }
        let k_scale: f64 = pairs
            .iter()
            .map(|(x, y)| kfun.eval(x, y).map(|v| v.norm()).unwrap_or(0.0))
            .fold(0.0, f64::max);
        let invariance_ok = invariance_residual <= 1e-8 * k_scale.max(1.0);
        let h_ok = h_fun_residual <= 1e-9 * max_abs(&h_n).max(1.0);
        let minimal = minimal_pair_matrices(k_n.matrix(), &h_n, tol).unwrap_or(false);
        if assertable {
            all_ok &= rank_ok;
        }
        all_ok &= invariance_ok && h_ok;

        let mut item = Report::new(format!("degree {n}"));
        item.int("rank", rank as i64);
        item.int("expected_rank", expected_rank as i64);
        if assertable {
            item.bool("rank_matches", rank_ok);
            item.bool("minimal", minimal);
        }
        item.float("invariance_residual", invariance_residual);
        item.bool("invariant", invariance_ok);
        item.float("majorant_function_residual", h_fun_residual);
        item.bool("majorant_matches", h_ok);
        report_items.push(item);

        let signature = component_signature(k_n.matrix(), tol);
        components.push(Component {
            kernel: k_n.matrix().clone(),
            majorant: h_n,
            weight: 1.0,
            rank,
            signature,
            minimal,
            invariant: invariance_ok,
            alphas: Vec::new(),
            majorant_residual: h_fun_residual,
            irreducibility: None,
            degree: Some(n),
        });
    }

    let truncation_residual = linalg::max_abs_diff(&truncation_sum, k_full.matrix());
    let truncation_ok = truncation_residual <= tail_bound + 1e-12;
    all_ok &= truncation_ok;

    let applicable = |a: &Component, b: &Component| {
        let dims = |c: &Component| {
            let n = c.degree.unwrap_or(0);
            (n + 1) * (n + 2) / 2
        };
        dims(a) + dims(b) <= num_points
    };
    let (pairwise_independence, all_independent) =
        pairwise_independence_table(&components, applicable);
    all_ok &= all_independent;

    let mut result = DecompositionResult {
        kernel: k_full.matrix().clone(),
        j: to_complex(&metric),
        components,
        residual_sum: truncation_residual,
        parseval_residual: 0.0,
        pairwise_independence,
        all_independent,
        forced: true,
        partial: false,
    };
    result.parseval_residual = verify_parseval(&result, 100, linalg::sub_seed(seed, 13));

    let mut report = Report::new("graded lorentz decomposition");
    report.int("max_degree", max_degree as i64);
    report.int("points", num_points as i64);
    report.float("halfwidth", halfwidth);
    report.int("seed", seed as i64);
    report.float("bilinear_radius", r_max);
    report.float("tail_bound", tail_bound);
    report.float("truncation_residual", truncation_residual);
    report.bool("truncation_within_bound", truncation_ok);
    report.float("parseval_residual", result.parseval_residual);
    report.bool("pairwise_independent", all_independent);
    report.bool("verified", all_ok);
    report.list("graded_components", report_items);
    Ok((result, report))
}
