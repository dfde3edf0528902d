//! Dense symmetric linear algebra for rank-deficient Gaussian covariance
//! calculus.
//!
//! Everything here targets the small dense matrices (dimension up to around a
//! hundred) that appear as covariance blocks: cyclic Jacobi
//! eigendecomposition, pseudo square roots that invert only the strictly
//! positive part of the spectrum, SVD through the symmetric augmented
//! embedding, Schur-complement conditional covariances, and mutual
//! information between Gaussian blocks via pseudo-determinants.
//!
//! Degenerate (singular) covariances are first-class citizens: every
//! operation decides rank with the shared relative cutoff [`RANK_TOL`] and
//! treats eigenvalues below it as exactly zero.

use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};

/// Eigenvalues below `RANK_TOL` times the largest-magnitude eigenvalue of the
/// same matrix are treated as exactly zero.
pub const RANK_TOL: f64 = 1e-10;

/// Largest relative asymmetry accepted by [`SymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-8;

const JACOBI_MAX_SWEEPS: usize = 60;

/// Splitting threshold for the augmented-embedding SVD: singular values below
/// this fraction of the largest one are handled as part of the null space,
/// where the embedding's eigenvectors no longer separate the two blocks.
const SVD_SPLIT_TOL: f64 = 1e-11;

/// Symmetric real matrix with finite entries.
///
/// Construction symmetrizes the input as `(A + Aᵀ)/2`; asymmetry beyond
/// [`SYMMETRY_TOL`] relative to the largest entry is rejected instead of
/// silently averaged away. Positive semi-definiteness is *not* part of the
/// type invariant — operations that need it check it themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    data: Array2<f64>,
}

impl SymMatrix {
    pub fn new(data: Array2<f64>) -> Result<Self> {
        if data.nrows() != data.ncols() {
            return Err(Error::Argument(format!(
                "expected a square matrix, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("matrix has a non-finite entry".into()));
        }
        let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut asym = 0.0_f64;
        for i in 0..data.nrows() {
            for j in (i + 1)..data.ncols() {
                asym = asym.max((data[(i, j)] - data[(j, i)]).abs());
            }
        }
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric {
                asymmetry: asym / scale,
                tolerance: SYMMETRY_TOL,
            });
        }
        Ok(Self::from_computed(data))
    }

    /// Wraps a matrix that is symmetric by construction (e.g. `B Λ Bᵀ` or a
    /// Schur complement), averaging away rounding-level asymmetry.
    pub(crate) fn from_computed(mut data: Array2<f64>) -> Self {
        debug_assert_eq!(data.nrows(), data.ncols());
        for i in 0..data.nrows() {
            for j in (i + 1)..data.ncols() {
                let v = 0.5 * (data[(i, j)] + data[(j, i)]);
                data[(i, j)] = v;
                data[(j, i)] = v;
            }
        }
        SymMatrix { data }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Argument(format!(
                "expected {n} rows of length {n}"
            )));
        }
        let data = Array2::from_shape_fn((n, n), |(i, j)| rows[i][j]);
        Self::new(data)
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix {
            data: Array2::eye(n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            data: Array2::zeros((n, n)),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = Array2::zeros((n, n));
        for (i, &v) in diag.iter().enumerate() {
            data[(i, i)] = v;
        }
        SymMatrix { data }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.data.row(i).to_vec())
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Eigendecomposition `A = B Λ Bᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    /// Eigenvalues sorted descending.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal matrix whose columns are the matching eigenvectors.
    pub eigenvectors: Array2<f64>,
    /// Count of eigenvalues above `RANK_TOL` times the largest magnitude.
    pub rank: usize,
}

pub fn eig_sym(a: &SymMatrix) -> Result<EigenDecomp> {
    eig_sym_labeled(a, "symmetric matrix")
}

/// Same as [`eig_sym`] but with a caller-supplied label naming the matrix in
/// a non-convergence error.
pub(crate) fn eig_sym_labeled(a: &SymMatrix, context: &str) -> Result<EigenDecomp> {
    let (vals, vecs) = jacobi(a.as_array().clone(), context)?;
    let (eigenvalues, eigenvectors) = sort_descending(vals, vecs);
    let rank = rank_of(&eigenvalues);
    Ok(EigenDecomp {
        eigenvalues,
        eigenvectors,
        rank,
    })
}

fn rank_of(sorted_desc: &[f64]) -> usize {
    let scale = eigen_scale(sorted_desc);
    sorted_desc.iter().filter(|&&l| l > RANK_TOL * scale).count()
}

/// Magnitude of the dominant eigenvalue; reference scale for rank cutoffs.
fn eigen_scale(sorted_desc: &[f64]) -> f64 {
    match (sorted_desc.first(), sorted_desc.last()) {
        (Some(a), Some(b)) => a.abs().max(b.abs()),
        _ => 0.0,
    }
}

/// Sorts eigenpairs by descending eigenvalue; ties keep their original order
/// so the output is deterministic.
fn sort_descending(vals: Vec<f64>, vecs: Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].partial_cmp(&vals[i]).unwrap().then(i.cmp(&j)));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        sorted_vecs.column_mut(dst).assign(&vecs.column(src));
    }
    (sorted_vals, sorted_vecs)
}

/// Cyclic Jacobi rotations with a fixed sweep order (row-major over the upper
/// triangle), which keeps the result deterministic for identical input.
fn jacobi(mut a: Array2<f64>, context: &str) -> Result<(Vec<f64>, Array2<f64>)> {
    let n = a.nrows();
    let mut v = Array2::<f64>::eye(n);
    if n < 2 {
        return Ok((a.diag().to_vec(), v));
    }
    let fro: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if fro == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    let target = 1e-15 * fro;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off_sq = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off_sq += a[(i, j)] * a[(i, j)];
            }
        }
        if (2.0 * off_sq).sqrt() <= target {
            return Ok((a.diag().to_vec(), v));
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // For huge |theta| the exact tangent underflows the radical;
                // fall back to its first-order form.
                let t = if theta.abs() > 1e100 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let g = a[(j, p)];
                    let h = a[(j, q)];
                    let gp = g - s * (h + tau * g);
                    let hq = h + s * (g - tau * h);
                    a[(j, p)] = gp;
                    a[(p, j)] = gp;
                    a[(j, q)] = hq;
                    a[(q, j)] = hq;
                }
                let d = t * apq;
                a[(p, p)] -= d;
                a[(q, q)] += d;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for j in 0..n {
                    let g = v[(j, p)];
                    let h = v[(j, q)];
                    v[(j, p)] = g - s * (h + tau * g);
                    v[(j, q)] = h + s * (g - tau * h);
                }
            }
        }
    }
    Err(Error::NonConvergence {
        context: context.to_string(),
        dim: n,
    })
}

/// `A^{1/2}` on the range of `A`: eigenvalues below the rank cutoff map to
/// exactly zero, everything else to its square root.
pub fn pseudo_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    pseudo_power(a, 0.5, "pseudo_sqrt input")
}

/// `A^{-1/2}` on the range of `A`: only strictly positive eigenvalues are
/// inverted, the null space maps to zero. `T = pseudo_inv_sqrt(A)` therefore
/// satisfies `T A T = P` with `P` the orthogonal projector onto the range.
pub fn pseudo_inv_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    pseudo_power(a, -0.5, "pseudo_inv_sqrt input")
}

/// Moore-Penrose inverse of a symmetric PSD matrix.
pub fn pseudo_inv(a: &SymMatrix) -> Result<SymMatrix> {
    pseudo_power(a, -1.0, "pseudo_inv input")
}

fn pseudo_power(a: &SymMatrix, exponent: f64, context: &str) -> Result<SymMatrix> {
    let eig = eig_sym_labeled(a, context)?;
    let scale = eigen_scale(&eig.eigenvalues);
    let cutoff = RANK_TOL * scale;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -cutoff {
            return Err(Error::NotPsd {
                context: context.to_string(),
                eigenvalue: min,
                cutoff: -cutoff,
            });
        }
    }
    let n = a.dim();
    let b = &eig.eigenvectors;
    let mut scaled = Array2::zeros((n, n));
    for j in 0..n {
        let l = eig.eigenvalues[j];
        let f = if l <= cutoff { 0.0 } else { l.powf(exponent) };
        for i in 0..n {
            scaled[(i, j)] = b[(i, j)] * f;
        }
    }
    Ok(SymMatrix::from_computed(scaled.dot(&b.t())))
}

/// Singular value decomposition `A = U Σ Vᵀ` with full orthogonal factors.
#[derive(Debug, Clone)]
pub struct SvdDecomp {
    /// Orthogonal `m x m` matrix of left singular vectors.
    pub left: Array2<f64>,
    /// Singular values, nonnegative and sorted descending, length `min(m, n)`.
    pub singular_values: Vec<f64>,
    /// Orthogonal `n x n` matrix of right singular vectors.
    pub right: Array2<f64>,
}

impl SvdDecomp {
    /// `U Σ Vᵀ` with `Σ` the rectangular diagonal of the singular values.
    pub fn reconstruct(&self) -> Array2<f64> {
        let m = self.left.nrows();
        let n = self.right.nrows();
        let mut sigma = Array2::zeros((m, n));
        for (i, &s) in self.singular_values.iter().enumerate() {
            sigma[(i, i)] = s;
        }
        self.left.dot(&sigma).dot(&self.right.t())
    }
}

/// SVD of a general rectangular matrix via the eigendecomposition of the
/// symmetric embedding `[[0, A], [Aᵀ, 0]]`, whose eigenvalues are `±σᵢ`.
///
/// Unlike the `AᵀA` route this loses no accuracy on small singular values,
/// which matters for the near-singular correlation blocks seen here. Null
/// directions (and any eigenvector that fell into the mixed zero cluster of
/// the embedding) are filled in by Gram-Schmidt completion, so both factors
/// are orthogonal even for rank-deficient input.
pub fn svd(a: &Array2<f64>) -> Result<SvdDecomp> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("matrix has a non-finite entry".into()));
    }
    let (m, n) = a.dim();
    let k = m.min(n);
    if k == 0 {
        return Ok(SvdDecomp {
            left: Array2::eye(m),
            singular_values: vec![],
            right: Array2::eye(n),
        });
    }
    let mut embedded = Array2::zeros((m + n, m + n));
    embedded.slice_mut(s![..m, m..]).assign(a);
    embedded.slice_mut(s![m.., ..m]).assign(&a.t());
    let (vals, vecs) = jacobi(embedded, "augmented SVD embedding")?;
    let (vals, vecs) = sort_descending(vals, vecs);

    let cutoff = SVD_SPLIT_TOL * vals[0].max(0.0);
    let mut left_slots: Vec<Option<Array1<f64>>> = vec![None; m];
    let mut right_slots: Vec<Option<Array1<f64>>> = vec![None; n];
    let mut singular = vec![0.0; k];
    for i in 0..k {
        let lam = vals[i];
        singular[i] = lam.max(0.0);
        if lam <= cutoff {
            continue;
        }
        let w = vecs.column(i);
        let wu = w.slice(s![..m]).to_owned();
        let wv = w.slice(s![m..]).to_owned();
        let nu = norm(&wu);
        let nv = norm(&wv);
        // Both halves carry weight 1/sqrt(2) for a clean ±σ pair; anything
        // else means the vector mixed with the zero cluster after all.
        if nu > 0.25 && nv > 0.25 {
            left_slots[i] = Some(wu / nu);
            right_slots[i] = Some(wv / nv);
        } else {
            singular[i] = 0.0;
        }
    }
    Ok(SvdDecomp {
        left: complete_orthonormal(left_slots),
        singular_values: singular,
        right: complete_orthonormal(right_slots),
    })
}

fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}

/// Turns a partially filled list of directions into a full orthonormal basis:
/// filled slots are re-orthonormalized in order (their directions move only
/// at rounding level), empty slots are completed from standard basis vectors.
fn complete_orthonormal(slots: Vec<Option<Array1<f64>>>) -> Array2<f64> {
    let dim = slots.len();
    let mut result = Array2::zeros((dim, dim));
    let mut accepted: Vec<Array1<f64>> = Vec::with_capacity(dim);
    let mut pending: Vec<usize> = Vec::new();

    let orthogonalize = |v: &mut Array1<f64>, accepted: &Vec<Array1<f64>>| {
        for _ in 0..2 {
            for u in accepted {
                let p = v.dot(u);
                v.scaled_add(-p, u);
            }
        }
    };

    for (i, slot) in slots.into_iter().enumerate() {
        match slot {
            Some(mut v) => {
                orthogonalize(&mut v, &accepted);
                let nrm = norm(&v);
                if nrm > 0.3 {
                    v /= nrm;
                    result.column_mut(i).assign(&v);
                    accepted.push(v);
                } else {
                    pending.push(i);
                }
            }
            None => pending.push(i),
        }
    }

    for i in pending {
        let mut chosen: Option<(f64, Array1<f64>)> = None;
        for j in 0..dim {
            let mut e = Array1::zeros(dim);
            e[j] = 1.0;
            orthogonalize(&mut e, &accepted);
            let nrm = norm(&e);
            if nrm > 0.5 {
                chosen = Some((nrm, e));
                break;
            }
            if chosen.as_ref().is_none_or(|(best, _)| nrm > *best) {
                chosen = Some((nrm, e));
            }
        }
        let (nrm, mut v) = chosen.expect("basis completion always finds a direction");
        v /= nrm;
        result.column_mut(i).assign(&v);
        accepted.push(v);
    }
    result
}

/// Rectangular block of `a` picked out by row and column index lists.
pub fn submatrix(a: &Array2<f64>, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| a[(rows[i], cols[j])])
}

/// Checks that every index is in bounds and that the index sets are pairwise
/// disjoint with no repeats.
fn validate_blocks(dim: usize, blocks: &[&[usize]]) -> Result<()> {
    let mut seen = vec![false; dim];
    for block in blocks {
        for &i in *block {
            if i >= dim {
                return Err(Error::Argument(format!(
                    "block index {i} out of range for dimension {dim}"
                )));
            }
            if seen[i] {
                return Err(Error::Argument(format!(
                    "block index {i} appears in more than one block"
                )));
            }
            seen[i] = true;
        }
    }
    Ok(())
}

/// Conditional covariance of the `target` block given the `given` block:
/// `Σ_T - Σ_TG Σ_G⁺ Σ_GT`, using the pseudo-inverse so singular conditioning
/// blocks are handled. An empty `given` block returns the marginal.
pub fn schur_conditional(
    joint: &SymMatrix,
    target: &[usize],
    given: &[usize],
) -> Result<SymMatrix> {
    validate_blocks(joint.dim(), &[target, given])?;
    let a = joint.as_array();
    let st = submatrix(a, target, target);
    let sg = SymMatrix::from_computed(submatrix(a, given, given));
    let stg = submatrix(a, target, given);
    let gi = pseudo_inv(&sg)?;
    let conditional = &st - &stg.dot(gi.as_array()).dot(&stg.t());
    Ok(SymMatrix::from_computed(conditional))
}

/// `schur_conditional` followed by a cleanup against the scale of the
/// *unconditional* target block. The complement of a PSD matrix is PSD in
/// exact arithmetic, so eigendirections whose conditional variance sits
/// within the rank tolerance of zero at the parent scale — including small
/// negative rounding debris from the elimination — are noise and are
/// flattened to exact zero. Without the flattening, a coordinate that is
/// almost surely determined by the conditioning block leaves a debris matrix
/// whose own scale is pure rounding, and every scale-relative decision
/// downstream misreads it.
pub(crate) fn schur_conditional_cleaned(
    joint: &SymMatrix,
    target: &[usize],
    given: &[usize],
) -> Result<SymMatrix> {
    let cond = schur_conditional(joint, target, given)?;
    let parent = target
        .iter()
        .map(|&i| joint.get(i, i))
        .fold(0.0_f64, f64::max);
    let eig = eig_sym_labeled(&cond, "conditional covariance")?;
    let floor = RANK_TOL * parent;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -floor {
            return Err(Error::NotPsd {
                context: "conditional covariance".to_string(),
                eigenvalue: min,
                cutoff: -floor,
            });
        }
    }
    let n = cond.dim();
    let kept: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > floor).collect();
    let mut out = Array2::zeros((n, n));
    for i in 0..n {
        for j in i..n {
            let mut v = 0.0;
            for &k in &kept {
                v += eig.eigenvectors[(i, k)] * eig.eigenvalues[k] * eig.eigenvectors[(j, k)];
            }
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(SymMatrix::from_computed(out))
}

fn log_pdet_and_rank(m: &SymMatrix, context: &str) -> Result<(f64, usize)> {
    let eig = eig_sym_labeled(m, context)?;
    let scale = eigen_scale(&eig.eigenvalues);
    let cutoff = RANK_TOL * scale;
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -cutoff {
            return Err(Error::NotPsd {
                context: context.to_string(),
                eigenvalue: min,
                cutoff: -cutoff,
            });
        }
    }
    let lpd = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| l.ln())
        .sum();
    Ok((lpd, eig.rank))
}

/// Mutual information `I(A; B)` in nats between two blocks of a jointly
/// Gaussian vector, from pseudo-determinants of the block covariances.
///
/// When the joint block covariance loses rank relative to the two marginals
/// the variables share an almost-sure linear relation, and the value is the
/// distinguished `+∞`. A joint rank *exceeding* the marginal ranks cannot
/// happen for a genuine covariance and is reported as a degenerate model.
pub fn gaussian_mi_det(joint: &SymMatrix, block_a: &[usize], block_b: &[usize]) -> Result<f64> {
    gaussian_cmi_det(joint, block_a, block_b, &[])
}

/// Conditional mutual information `I(A; B | C)` in nats: the plain
/// pseudo-determinant mutual information of the pair's *conditional*
/// covariance given `C`. Conditioning first keeps coordinates that are
/// almost surely determined by `C` out of the pseudo-determinants — they
/// carry no conditional information, but their correlations through the
/// conditioning span would bias a difference of unconditional terms — and
/// it means an infinite `I(A; C)` can never poison a finite conditional
/// value. On full-rank models this equals the telescoped four-term
/// difference `½(log pdet Σ_AC + log pdet Σ_BC − log pdet Σ_ABC −
/// log pdet Σ_C)` exactly.
pub fn gaussian_cmi_det(
    joint: &SymMatrix,
    block_a: &[usize],
    block_b: &[usize],
    given: &[usize],
) -> Result<f64> {
    validate_blocks(joint.dim(), &[block_a, block_b, given])?;
    let ab: Vec<usize> = block_a.iter().chain(block_b.iter()).copied().collect();
    let cond = if given.is_empty() {
        SymMatrix::from_computed(submatrix(joint.as_array(), &ab, &ab))
    } else {
        schur_conditional_cleaned(joint, &ab, given)?
    };
    let arr = cond.as_array();
    let ia: Vec<usize> = (0..block_a.len()).collect();
    let ib: Vec<usize> = (block_a.len()..ab.len()).collect();
    let take = |idx: &[usize]| SymMatrix::from_computed(submatrix(arr, idx, idx));
    let (lpd_a, r_a) = log_pdet_and_rank(&take(&ia), "conditional covariance of block A")?;
    let (lpd_b, r_b) = log_pdet_and_rank(&take(&ib), "conditional covariance of block B")?;
    let (lpd_ab, r_ab) = log_pdet_and_rank(&cond, "conditional pair covariance")?;

    // The pair's range sits inside the direct sum of the marginal ranges, so
    // the slack below is nonnegative for any consistent covariance; positive
    // slack means an almost-sure linear relation ties A to B given C.
    let slack = (r_a + r_b) as i64 - r_ab as i64;
    if slack < 0 {
        return Err(Error::DegenerateModel(format!(
            "conditional pair rank {r_ab} exceeds marginal ranks {r_a} + {r_b}"
        )));
    }
    if slack > 0 {
        return Ok(f64::INFINITY);
    }
    Ok(0.5 * (lpd_a + lpd_b - lpd_ab))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        a.iter()
            .zip(b.iter())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
    }

    fn orthogonality_defect(q: &Array2<f64>) -> f64 {
        let n = q.nrows();
        max_abs_diff(&q.t().dot(q), &Array2::eye(n))
    }

    #[test]
    fn asymmetry_beyond_tolerance_is_rejected() {
        let err = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { .. }));
        // Rounding-level asymmetry is averaged away.
        let ok = SymMatrix::from_rows(&[vec![1.0, 0.5 + 1e-12], vec![0.5, 1.0]]).unwrap();
        assert_eq!(ok.get(0, 1), ok.get(1, 0));
    }

    #[test]
    fn eig_identity() {
        let eig = eig_sym(&SymMatrix::identity(3)).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 1.0, 1.0]);
        assert_eq!(eig.rank, 3);
    }

    #[test]
    fn eig_two_by_two_exchange() {
        // [[2,1],[1,2]] has eigenvalues 3 and 1 (characteristic polynomial
        // (2-l)^2 - 1).
        let eig = eig_sym(&SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap())
            .unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.eigenvalues[1], 1.0, epsilon = 1e-12);
        assert_eq!(eig.rank, 2);
    }

    #[test]
    fn eig_rank_one() {
        let a = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let eig = eig_sym(&a).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(eig.eigenvalues[1], 0.0, epsilon = 1e-12);
        assert_eq!(eig.rank, 1);
        // Dominant eigenvector is ±(1,1)/sqrt(2).
        let v = eig.eigenvectors.column(0);
        let overlap = (v[0] + v[1]).abs() / 2.0_f64.sqrt();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eig_reconstruction_and_orthogonality() {
        #[rustfmt::skip]
        let a = SymMatrix::from_rows(&[
            vec![ 1.2, -0.3,  0.4,  0.0,  0.1],
            vec![-0.3,  2.0,  0.2, -0.5,  0.0],
            vec![ 0.4,  0.2,  0.9,  0.3, -0.2],
            vec![ 0.0, -0.5,  0.3,  1.5,  0.6],
            vec![ 0.1,  0.0, -0.2,  0.6,  0.7],
        ]).unwrap();
        let eig = eig_sym(&a).unwrap();
        assert!(orthogonality_defect(&eig.eigenvectors) < 1e-12);
        let n = a.dim();
        let mut recon = Array2::zeros((n, n));
        for j in 0..n {
            let v = eig.eigenvectors.column(j);
            for r in 0..n {
                for c in 0..n {
                    recon[(r, c)] += eig.eigenvalues[j] * v[r] * v[c];
                }
            }
        }
        assert!(max_abs_diff(&recon, a.as_array()) < 1e-10);
        // Sorted descending.
        for w in eig.eigenvalues.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn pseudo_sqrt_of_rank_one_matrix() {
        let a = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = pseudo_sqrt(&a).unwrap();
        let expected = 1.0 / 2.0_f64.sqrt();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(s.get(i, j), expected, epsilon = 1e-12);
            }
        }
        // S·S recovers the input on its range.
        let ss = s.as_array().dot(s.as_array());
        assert!(max_abs_diff(&ss, a.as_array()) < 1e-9);
    }

    #[test]
    fn pseudo_inv_sqrt_scalar_and_identity() {
        let t = pseudo_inv_sqrt(&SymMatrix::from_diag(&[4.0])).unwrap();
        assert_abs_diff_eq!(t.get(0, 0), 0.5, epsilon = 1e-14);
        let i3 = pseudo_inv_sqrt(&SymMatrix::identity(3)).unwrap();
        assert!(max_abs_diff(i3.as_array(), &Array2::eye(3)) < 1e-12);
    }

    #[test]
    fn pseudo_ops_reject_indefinite_input() {
        let a = SymMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(pseudo_sqrt(&a), Err(Error::NotPsd { .. })));
        assert!(matches!(pseudo_inv_sqrt(&a), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn svd_diagonal_and_antidiagonal() {
        let d = Array2::from_shape_vec((2, 2), vec![0.5, 0.0, 0.0, 0.3]).unwrap();
        let dec = svd(&d).unwrap();
        assert_abs_diff_eq!(dec.singular_values[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.singular_values[1], 0.3, epsilon = 1e-12);

        let anti = Array2::from_shape_vec((2, 2), vec![0.0, 0.5, 0.5, 0.0]).unwrap();
        let dec = svd(&anti).unwrap();
        assert_abs_diff_eq!(dec.singular_values[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.singular_values[1], 0.5, epsilon = 1e-12);
        assert!(max_abs_diff(&dec.reconstruct(), &anti) < 1e-10);
    }

    #[test]
    fn svd_zero_matrix() {
        let z = Array2::zeros((2, 3));
        let dec = svd(&z).unwrap();
        assert_eq!(dec.singular_values, vec![0.0, 0.0]);
        assert!(orthogonality_defect(&dec.left) < 1e-12);
        assert!(orthogonality_defect(&dec.right) < 1e-12);
    }

    #[test]
    fn svd_rectangular_reconstruction() {
        let a = Array2::from_shape_vec(
            (2, 4),
            vec![0.3, -0.1, 0.7, 0.2, 0.0, 0.5, -0.4, 0.6],
        )
        .unwrap();
        let dec = svd(&a).unwrap();
        assert_eq!(dec.singular_values.len(), 2);
        assert!(max_abs_diff(&dec.reconstruct(), &a) < 1e-10);
        assert!(orthogonality_defect(&dec.left) < 1e-12);
        assert!(orthogonality_defect(&dec.right) < 1e-12);
    }

    #[test]
    fn svd_rank_deficient() {
        // Second row is a multiple of the first: one singular value vanishes.
        let a = Array2::from_shape_vec((2, 3), vec![1.0, 2.0, 3.0, 2.0, 4.0, 6.0]).unwrap();
        let dec = svd(&a).unwrap();
        assert!(dec.singular_values[1].abs() < 1e-10 * dec.singular_values[0]);
        assert!(max_abs_diff(&dec.reconstruct(), &a) < 1e-10);
        assert!(orthogonality_defect(&dec.left) < 1e-12);
        assert!(orthogonality_defect(&dec.right) < 1e-12);
    }

    #[test]
    fn schur_scalar_matches_determinant_ratio() {
        let joint = SymMatrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let cond = schur_conditional(&joint, &[0], &[1]).unwrap();
        assert_abs_diff_eq!(cond.get(0, 0), 1.0 - 0.36, epsilon = 1e-14);
        // Independent oracle: det(joint) / det(given block).
        let det_ratio = (1.0 * 1.0 - 0.6 * 0.6) / 1.0;
        assert_abs_diff_eq!(cond.get(0, 0), det_ratio, epsilon = 1e-14);
    }

    #[test]
    fn schur_with_empty_given_is_marginal() {
        let joint = SymMatrix::from_rows(&[vec![2.0, 0.3], vec![0.3, 1.0]]).unwrap();
        let cond = schur_conditional(&joint, &[0, 1], &[]).unwrap();
        assert!(max_abs_diff(cond.as_array(), joint.as_array()) < 1e-14);
    }

    #[test]
    fn schur_conditioning_on_identical_copy_kills_variance() {
        // (X, U) with U = X almost surely.
        let joint = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let cond = schur_conditional(&joint, &[0], &[1]).unwrap();
        assert!(cond.get(0, 0).abs() < 1e-12);
    }

    #[test]
    fn schur_rejects_overlapping_blocks() {
        let joint = SymMatrix::identity(3);
        assert!(matches!(
            schur_conditional(&joint, &[0, 1], &[1, 2]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn mi_of_independent_blocks_is_zero() {
        let joint = SymMatrix::from_diag(&[1.0, 2.0, 3.0]);
        let mi = gaussian_mi_det(&joint, &[0], &[1, 2]).unwrap();
        assert_abs_diff_eq!(mi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mi_scalar_correlated_pair() {
        let joint = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let mi = gaussian_mi_det(&joint, &[0], &[1]).unwrap();
        // -0.5 ln(1 - 0.25) = 0.5 ln(4/3)
        assert_abs_diff_eq!(mi, 0.143_841_036_225_890_4, epsilon = 1e-12);
    }

    #[test]
    fn mi_of_duplicated_variable_is_infinite() {
        let joint = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let mi = gaussian_mi_det(&joint, &[0], &[1]).unwrap();
        assert!(mi.is_infinite() && mi > 0.0);
    }

    #[test]
    fn mi_is_symmetric_in_blocks() {
        let joint = SymMatrix::from_rows(&[
            vec![1.0, 0.3, 0.2],
            vec![0.3, 1.0, -0.4],
            vec![0.2, -0.4, 1.0],
        ])
        .unwrap();
        let ab = gaussian_mi_det(&joint, &[0], &[1, 2]).unwrap();
        let ba = gaussian_mi_det(&joint, &[1, 2], &[0]).unwrap();
        assert_abs_diff_eq!(ab, ba, epsilon = 1e-12);
    }

    #[test]
    fn cmi_conditioning_on_perfect_copy_is_zero() {
        // I(X; Y | U) with U = X: conditioning removes everything.
        let joint = SymMatrix::from_rows(&[
            vec![1.0, 0.5, 1.0],
            vec![0.5, 1.0, 0.5],
            vec![1.0, 0.5, 1.0],
        ])
        .unwrap();
        let cmi = gaussian_cmi_det(&joint, &[0], &[1], &[2]).unwrap();
        assert_abs_diff_eq!(cmi, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn cmi_with_empty_conditioning_is_mi() {
        let joint = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
        let a = gaussian_mi_det(&joint, &[0], &[1]).unwrap();
        let b = gaussian_cmi_det(&joint, &[0], &[1], &[]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }

    // ---------------------------------------------------------------------
    // Property tests
    // ---------------------------------------------------------------------

    /// Gram-matrix factor entries for a PSD matrix of the given shape.
    fn psd_from_factor(dim: usize, rank: usize, entries: &[f64]) -> SymMatrix {
        let g = Array2::from_shape_fn((dim, rank), |(i, j)| entries[i * rank + j]);
        SymMatrix::from_computed(g.dot(&g.t()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eig_reconstructs_random_psd(
            dim in 2usize..7,
            rank in 1usize..7,
            entries in prop::collection::vec(-1.0f64..1.0, 49),
        ) {
            let rank = rank.min(dim);
            let a = psd_from_factor(dim, rank, &entries);
            let eig = eig_sym(&a).unwrap();
            prop_assert!(orthogonality_defect(&eig.eigenvectors) < 1e-11);
            let b = &eig.eigenvectors;
            let mut lam = Array2::zeros((dim, dim));
            for (i, &l) in eig.eigenvalues.iter().enumerate() {
                lam[(i, i)] = l;
            }
            let recon = b.dot(&lam).dot(&b.t());
            let scale = a.max_abs().max(1.0);
            prop_assert!(max_abs_diff(&recon, a.as_array()) <= 1e-10 * scale);
            prop_assert!(eig.rank <= rank);
        }

        #[test]
        fn pseudo_inv_sqrt_whitens_to_projector(
            dim in 2usize..7,
            rank in 1usize..7,
            entries in prop::collection::vec(-1.0f64..1.0, 49),
        ) {
            let rank = rank.min(dim);
            let a = psd_from_factor(dim, rank, &entries);
            let t = pseudo_inv_sqrt(&a).unwrap();
            let p = t.as_array().dot(a.as_array()).dot(t.as_array());
            // T A T is an orthogonal projector: every eigenvalue is 0 or 1.
            let eig = eig_sym(&SymMatrix::from_computed(p)).unwrap();
            for &l in &eig.eigenvalues {
                let nearest = if l > 0.5 { 1.0 } else { 0.0 };
                prop_assert!((l - nearest).abs() < 1e-9);
            }
            let ones = eig.eigenvalues.iter().filter(|&&l| l > 0.5).count();
            prop_assert_eq!(ones, eig_sym(&a).unwrap().rank);
        }

        #[test]
        fn svd_contract_on_random_rectangular(
            m in 1usize..6,
            n in 1usize..6,
            entries in prop::collection::vec(-1.0f64..1.0, 36),
        ) {
            let a = Array2::from_shape_fn((m, n), |(i, j)| entries[i * n + j]);
            let dec = svd(&a).unwrap();
            prop_assert!(orthogonality_defect(&dec.left) < 1e-11);
            prop_assert!(orthogonality_defect(&dec.right) < 1e-11);
            for w in dec.singular_values.windows(2) {
                prop_assert!(w[0] >= w[1]);
            }
            for &s in &dec.singular_values {
                prop_assert!(s >= 0.0);
            }
            let scale = a.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            prop_assert!(max_abs_diff(&dec.reconstruct(), &a) <= 1e-10 * scale);
        }

        #[test]
        fn mi_nonnegative_and_invariant_under_reparametrization(
            dim_a in 1usize..4,
            dim_b in 1usize..4,
            factor in prop::collection::vec(-1.0f64..1.0, 64),
            mix in prop::collection::vec(0.2f64..1.0, 16),
        ) {
            let dim = dim_a + dim_b;
            let g = Array2::from_shape_fn((dim, dim + 1), |(i, j)| factor[i * (dim + 1) + j]);
            let joint = SymMatrix::from_computed(g.dot(&g.t()));
            let a_idx: Vec<usize> = (0..dim_a).collect();
            let b_idx: Vec<usize> = (dim_a..dim).collect();
            let mi = gaussian_mi_det(&joint, &a_idx, &b_idx).unwrap();
            prop_assert!(mi.is_infinite() || mi >= -1e-10);

            if mi.is_finite() {
                // Congruence by a well-conditioned invertible map on block A.
                let mut t = Array2::eye(dim);
                for i in 0..dim_a {
                    t[(i, i)] = mix[i];
                    for j in 0..dim_a {
                        if i != j {
                            t[(i, j)] = 0.2 * mix[4 + i] * mix[8 + j];
                        }
                    }
                }
                let transformed =
                    SymMatrix::from_computed(t.dot(joint.as_array()).dot(&t.t()));
                let mi_t = gaussian_mi_det(&transformed, &a_idx, &b_idx).unwrap();
                prop_assert!((mi - mi_t).abs() < 1e-8);
            }
        }
    }
}
