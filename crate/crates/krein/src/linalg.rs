//! Dense linear-algebra helpers shared by every module.
//!
//! Everything is computed over `Complex<f64>`, but inputs that are real stay
//! real where the operation is closed over the reals: [`nullspace_auto`]
//! solves a real system when its input has no imaginary part, so the basis it
//! returns is real as well. Rank decisions compare singular values against
//! `tol * sigma_max`, never against an absolute cutoff alone.

use crate::{CMatrix, CVector, KreinError, RMatrix, Result, Scalar};
use nalgebra::ComplexField;
use rand::Rng;

/// Real scalar promoted to a complex one.
#[inline]
#[must_use]
pub fn cr(re: f64) -> Scalar {
    Scalar::new(re, 0.0)
}

/// Largest entry modulus; zero for empty matrices.
#[must_use]
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry modulus of `a - b`.
#[must_use]
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

/// `max |m - m^*|` over all entries.
#[must_use]
pub fn hermitian_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Hermitian part `(m + m^*) / 2`.
#[must_use]
pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// True when every imaginary part is at most `tol * max(1, |m|_max)`.
#[must_use]
pub fn is_real(m: &CMatrix, tol: f64) -> bool {
    let scale = max_abs(m).max(1.0);
    m.iter().all(|z| z.im.abs() <= tol * scale)
}

/// Drops imaginary parts. Only meaningful after [`is_real`].
#[must_use]
pub fn real_part(m: &CMatrix) -> RMatrix {
    RMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Embeds a real matrix into the complex scalar type.
#[must_use]
pub fn to_complex(m: &RMatrix) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| cr(m[(i, j)]))
}

/// Complex identity.
#[must_use]
pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending and the
/// eigenvector columns aligned with them.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition. The input is symmetrized first so that
/// round-off never feeds a slightly non-Hermitian matrix to the solver; the
/// caller is responsible for checking Hermiticity when it is a precondition.
#[must_use]
pub fn herm_eigen(m: &CMatrix) -> HermEigen {
    let n = m.nrows();
    if n == 0 {
        return HermEigen {
            values: Vec::new(),
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let se = hermitize(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].partial_cmp(&se.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    HermEigen { values, vectors }
}

impl HermEigen {
    /// Rebuilds `V f(D) V^*` from this decomposition.
    #[must_use]
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.nrows();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            out += (v * v.adjoint()).scale(f(lambda));
        }
        out
    }
}

/// Applies `f` to the spectrum of a Hermitian matrix: `V f(D) V^*`.
#[must_use]
pub fn spectral_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    herm_eigen(m).map(f)
}

/// Entrywise-spectral absolute value `|M|` of a Hermitian matrix.
#[must_use]
pub fn matrix_abs(m: &CMatrix) -> CMatrix {
    spectral_map(m, f64::abs)
}

/// Positive-semidefinite square root, clamping tiny negative eigenvalues.
#[must_use]
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    spectral_map(m, |l| l.max(0.0).sqrt())
}

/// Smallest eigenvalue of a Hermitian matrix.
#[must_use]
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    herm_eigen(m).values.first().copied().unwrap_or(0.0)
}

/// Positive-semidefiniteness against an external scale: the most negative
/// eigenvalue must stay above `-tol * scale`. Use for difference matrices
/// that may legitimately vanish — judged against their own magnitude, pure
/// rounding noise would read as indefinite.
#[must_use]
pub fn psd_within(m: &CMatrix, tol: f64, scale: f64) -> (bool, f64) {
    let min = min_eigenvalue(m);
    (min >= -tol * scale.max(1e-300), min)
}

/// Rank with singular values judged against an external `scale` rather than
/// the matrix's own largest singular value. Use for sub-blocks of a larger
/// computation: a block that vanishes up to rounding has a tiny top singular
/// value, so a threshold relative to that top value would count pure noise
/// as rank.
#[must_use]
pub fn rank_at_scale(m: &CMatrix, tol: f64, scale: f64) -> usize {
    let floor = tol * scale.max(1e-300);
    singular_values(m).iter().filter(|&&s| s > floor).count()
}

/// Positive-semidefiniteness verdict: the most negative eigenvalue must stay
/// above `-tol * max|eigenvalue|`. Returns `(ok, min_eigenvalue)`.
#[must_use]
pub fn psd_check(m: &CMatrix, tol: f64) -> (bool, f64) {
    let eig = herm_eigen(m);
    let scale = eig.values.iter().map(|l| l.abs()).fold(0.0, f64::max);
    let min = eig.values.first().copied().unwrap_or(0.0);
    (min >= -tol * scale.max(1e-300), min)
}

/// Singular values, descending.
#[must_use]
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sv
}

/// Numerical rank against `tol * sigma_max`.
#[must_use]
pub fn rank(m: &CMatrix, tol: f64) -> usize {
    let sv = singular_values(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

fn pad_to_tall(m: &CMatrix) -> CMatrix {
    if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut padded = CMatrix::zeros(m.ncols(), m.ncols());
        padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        padded
    }
}

/// Orthonormal basis of the right nullspace, as matrix columns. Wide inputs
/// are padded with zero rows so that the decomposition sees the full `V`.
#[must_use]
pub fn nullspace(m: &CMatrix, tol: f64) -> CMatrix {
    nullspace_cut(m, tol, None)
}

/// [`nullspace`] with the cutoff anchored to an external `scale`: singular
/// values at most `tol * scale` count as null. Use when the rows encode
/// residuals from a larger computation and may vanish wholesale — judged
/// relative to its own top singular value, a noise-level matrix would have
/// no nullspace at all.
#[must_use]
pub fn nullspace_at_scale(m: &CMatrix, tol: f64, scale: f64) -> CMatrix {
    nullspace_cut(m, tol, Some(scale))
}

fn nullspace_cut(m: &CMatrix, tol: f64, scale: Option<f64>) -> CMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return CMatrix::zeros(m.nrows(), 0);
    }
    let padded = pad_to_tall(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("SVD was asked for V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * scale.unwrap_or(smax);
    let keep_all = scale.is_none() && smax == 0.0;
    // v_t has exactly `cols` rows after padding; the filter keeps indices in
    // ascending order.
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| keep_all || svd.singular_values[i] <= cutoff)
        .collect();
    let mut basis = CMatrix::zeros(cols, kept.len());
    for (dst, &i) in kept.iter().enumerate() {
        basis.set_column(dst, &v_t.row(i).adjoint());
    }
    basis
}

/// Real-matrix variant of [`nullspace`].
#[must_use]
pub fn nullspace_real(m: &RMatrix, tol: f64) -> RMatrix {
    nullspace_real_cut(m, tol, None)
}

/// Real-matrix variant of [`nullspace_at_scale`].
#[must_use]
pub fn nullspace_real_at_scale(m: &RMatrix, tol: f64, scale: f64) -> RMatrix {
    nullspace_real_cut(m, tol, Some(scale))
}

fn nullspace_real_cut(m: &RMatrix, tol: f64, scale: Option<f64>) -> RMatrix {
    let cols = m.ncols();
    if cols == 0 {
        return RMatrix::zeros(m.nrows(), 0);
    }
    let padded = if m.nrows() >= m.ncols() {
        m.clone()
    } else {
        let mut p = RMatrix::zeros(m.ncols(), m.ncols());
        p.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        p
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("SVD was asked for V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * scale.unwrap_or(smax);
    let keep_all = scale.is_none() && smax == 0.0;
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| keep_all || svd.singular_values[i] <= cutoff)
        .collect();
    let mut basis = RMatrix::zeros(cols, kept.len());
    for (dst, &i) in kept.iter().enumerate() {
        basis.set_column(dst, &v_t.row(i).transpose());
    }
    basis
}

/// [`nullspace`] that solves over the reals when the input is real, so real
/// systems get real basis vectors.
#[must_use]
pub fn nullspace_auto(m: &CMatrix, tol: f64) -> CMatrix {
    if is_real(m, 1e-14) {
        to_complex(&nullspace_real(&real_part(m), tol))
    } else {
        nullspace(m, tol)
    }
}

/// Real-matrix variant of [`column_space`].
#[must_use]
pub fn column_space_real(m: &RMatrix, tol: f64) -> RMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return RMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("SVD was asked for U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * smax;
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > cutoff)
        .collect();
    let mut basis = RMatrix::zeros(rows, kept.len());
    for (dst, &i) in kept.iter().enumerate() {
        basis.set_column(dst, &u.column(i));
    }
    basis
}

/// [`column_space`] that factors over the reals when the input is real, so
/// real ranges get real orthonormal bases.
#[must_use]
pub fn column_space_auto(m: &CMatrix, tol: f64) -> CMatrix {
    if is_real(m, 1e-14) {
        to_complex(&column_space_real(&real_part(m), tol))
    } else {
        column_space(m, tol)
    }
}

/// Orthonormal basis of the column space, as matrix columns.
#[must_use]
pub fn column_space(m: &CMatrix, tol: f64) -> CMatrix {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return CMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("SVD was asked for U");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * smax;
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > cutoff)
        .collect();
    let mut basis = CMatrix::zeros(rows, kept.len());
    for (dst, &i) in kept.iter().enumerate() {
        basis.set_column(dst, &u.column(i));
    }
    basis
}

/// Inverse via LU; errors on numerically singular input.
pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone().try_inverse().ok_or(KreinError::SingularGram {
        sigma_min: singular_values(m).last().copied().unwrap_or(0.0),
    })
}

/// Eigenvalues of a general complex matrix, sorted by real then imaginary
/// part for reproducibility.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Scalar>> {
    let ev = m.clone().eigenvalues().ok_or(KreinError::EigenFailed)?;
    let mut out: Vec<Scalar> = ev.iter().copied().collect();
    out.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    Ok(out)
}

/// Groups values into clusters of mutual distance at most `gap`
/// (transitively). Returns, per cluster, the member indices.
#[must_use]
pub fn cluster_indices(values: &[Scalar], gap: f64) -> Vec<Vec<usize>> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= gap {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of_group: Vec<usize> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of_group.iter().position(|&g| g == r) {
            Some(k) => groups[k].push(i),
            None => {
                root_of_group.push(r);
                groups.push(vec![i]);
            }
        }
    }
    groups.sort_by(|a, b| {
        let ca = values[a[0]];
        let cb = values[b[0]];
        ca.re
            .partial_cmp(&cb.re)
            .unwrap()
            .then(ca.im.partial_cmp(&cb.im).unwrap())
    });
    groups
}

/// Columns of `m` stacked into one vector (column-major, matching the
/// underlying storage).
#[must_use]
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`].
#[must_use]
pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Frobenius inner product `tr(a^* b)`.
#[must_use]
pub fn frobenius_product(a: &CMatrix, b: &CMatrix) -> Scalar {
    a.iter().zip(b.iter()).map(|(x, y)| x.conjugate() * y).sum()
}

/// Orthonormal basis (columns) of the intersection of two column spans.
#[must_use]
pub fn span_intersection(a: &CMatrix, b: &CMatrix, tol: f64) -> CMatrix {
    if a.ncols() == 0 || b.ncols() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let mut stacked = CMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    stacked
        .view_mut((0, 0), (a.nrows(), a.ncols()))
        .copy_from(a);
    stacked
        .view_mut((0, a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(&(-b));
    let null = nullspace_auto(&stacked, tol);
    if null.ncols() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let coeff_a = null.view((0, 0), (a.ncols(), null.ncols())).into_owned();
    column_space(&(a * coeff_a), tol)
}

/// True when every column of `inner` lies in the span of `outer`.
#[must_use]
pub fn span_contains(outer: &CMatrix, inner: &CMatrix, tol: f64) -> bool {
    if inner.ncols() == 0 {
        return true;
    }
    let r_outer = rank(outer, tol);
    let mut stacked = CMatrix::zeros(outer.nrows(), outer.ncols() + inner.ncols());
    stacked
        .view_mut((0, 0), (outer.nrows(), outer.ncols()))
        .copy_from(outer);
    stacked
        .view_mut((0, outer.ncols()), (inner.nrows(), inner.ncols()))
        .copy_from(inner);
    rank(&stacked, tol) == r_outer
}

/// True when the two column spans agree.
#[must_use]
pub fn same_span(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    rank(a, tol) == rank(b, tol) && span_contains(a, b, tol)
}

/// `m^k` by repeated squaring (`k = 0` gives the identity).
#[must_use]
pub fn matrix_power(m: &CMatrix, k: usize) -> CMatrix {
    let n = m.nrows();
    let mut result = identity(n);
    let mut base = m.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

/// Uniform random matrix with entries in `[-1, 1]` (both parts when
/// `complex` is set).
pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, complex: bool) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re = rng.gen_range(-1.0..=1.0);
        let im = if complex {
            rng.gen_range(-1.0..=1.0)
        } else {
            0.0
        };
        Scalar::new(re, im)
    })
}

/// Random Hermitian matrix with spread-out spectrum.
pub fn random_hermitian(rng: &mut impl Rng, n: usize, complex: bool) -> CMatrix {
    let a = random_matrix(rng, n, n, complex);
    hermitize(&a)
}

/// Deterministic derived seed, splitmix64-style, so recursive searches stay
/// reproducible without sharing one generator.
#[must_use]
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    #[test]
    fn herm_eigen_sorts_ascending() {
        let m = CMatrix::from_row_slice(2, 2, &[cr(2.0), c(0.0, 1.0), c(0.0, -1.0), cr(2.0)]);
        let eig = herm_eigen(&m);
        assert!((eig.values[0] - 1.0).abs() < 1e-12);
        assert!((eig.values[1] - 3.0).abs() < 1e-12);
        // reconstruction
        let mut rec = CMatrix::zeros(2, 2);
        for k in 0..2 {
            let v = eig.vectors.column(k);
            rec += (v * v.adjoint()).scale(eig.values[k]);
        }
        assert!(max_abs_diff(&rec, &m) < 1e-12);
    }

    #[test]
    fn matrix_abs_of_hyperbolic_gram_is_identity() {
        let g = CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]);
        assert!(max_abs_diff(&matrix_abs(&g), &identity(2)) < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix_sees_all_directions() {
        // 1x3 matrix: nullspace must be 2-dimensional despite the thin SVD.
        let m = CMatrix::from_row_slice(1, 3, &[cr(1.0), cr(0.0), cr(0.0)]);
        let ns = nullspace(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(max_abs(&(&m * &ns)) < 1e-12);
    }

    #[test]
    fn nullspace_auto_keeps_real_input_real() {
        let m = CMatrix::from_row_slice(
            2,
            3,
            &[cr(1.0), cr(1.0), cr(0.0), cr(0.0), cr(1.0), cr(1.0)],
        );
        let ns = nullspace_auto(&m, 1e-12);
        assert_eq!(ns.ncols(), 1);
        assert!(ns.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn rank_respects_relative_cutoff() {
        let m = CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(1e-14)]);
        assert_eq!(rank(&m, 1e-10), 1);
        assert_eq!(rank(&m, 1e-16), 2);
        assert_eq!(rank(&CMatrix::zeros(3, 3), 1e-10), 0);
    }

    #[test]
    fn span_intersection_of_planes_is_line() {
        // span{e1,e2} meet span{e2,e3} = span{e2}
        let a = CMatrix::from_row_slice(
            3,
            2,
            &[cr(1.0), cr(0.0), cr(0.0), cr(1.0), cr(0.0), cr(0.0)],
        );
        let b = CMatrix::from_row_slice(
            3,
            2,
            &[cr(0.0), cr(0.0), cr(1.0), cr(0.0), cr(0.0), cr(1.0)],
        );
        let w = span_intersection(&a, &b, 1e-12);
        assert_eq!(w.ncols(), 1);
        assert!(w[(0, 0)].norm() < 1e-12 && w[(2, 0)].norm() < 1e-12);
        assert!((w[(1, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_indices_groups_and_orders() {
        let vals = vec![c(3.0, 0.0), c(1.0, 0.0), c(3.0 + 1e-12, 0.0), c(1.0, 1e-13)];
        let groups = cluster_indices(&vals, 1e-9);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0], vec![1, 3]);
        assert_eq!(groups[1], vec![0, 2]);
    }

    #[test]
    fn vectorize_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = random_matrix(&mut rng, 3, 4, true);
        let v = vectorize(&m);
        assert_eq!(unvectorize(&v, 3, 4), m);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = random_matrix(&mut rng, 3, 3, true);
        let p3 = matrix_power(&m, 3);
        assert!(max_abs_diff(&p3, &(&m * &m * &m)) < 1e-12);
        assert_eq!(matrix_power(&m, 0), identity(3));
    }
}
