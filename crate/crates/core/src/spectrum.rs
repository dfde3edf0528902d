//! Gaussian vector models and their correlation spectra.
//!
//! A model is a joint covariance over the stacked vector `(X, Y, U)` plus an
//! optional linear disclosure channel acting on `X`. The central object
//! derived from it is the correlation spectrum of a pair of blocks: the
//! singular values of the whitened cross-covariance, together with the pair
//! of invertible transforms that simultaneously bring both marginals to
//! `diag(I_r, 0)` and the cross-covariance to a nonnegative diagonal. All
//! downstream rate expressions are functions of these spectra alone.

use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::matgauss::{
    eig_sym_labeled, schur_conditional_cleaned, svd, SymMatrix, RANK_TOL,
};

/// Absolute amount by which a computed canonical correlation may exceed 1
/// before the model is rejected instead of clamped.
pub const CORRELATION_CLAMP_TOL: f64 = 1e-8;

/// Linear disclosure channel `D_x = gain · X + N` with `N ~ N(0, noise)`
/// independent of everything else.
#[derive(Debug, Clone)]
pub struct DisclosureChannel {
    pub gain: Array2<f64>,
    pub noise: SymMatrix,
}

/// Jointly Gaussian model over the stacked vector `(X, Y, U)`.
///
/// `U` may be empty (`dim_u = 0`); the joint covariance may be singular.
#[derive(Debug, Clone)]
pub struct GaussianModel {
    dim_x: usize,
    dim_y: usize,
    dim_u: usize,
    joint: SymMatrix,
    disclosure_channel: Option<DisclosureChannel>,
}

impl GaussianModel {
    pub fn new(
        dim_x: usize,
        dim_y: usize,
        dim_u: usize,
        joint: SymMatrix,
        disclosure_channel: Option<DisclosureChannel>,
    ) -> Result<Self> {
        let dim = dim_x + dim_y + dim_u;
        if joint.dim() != dim {
            return Err(Error::Model(format!(
                "joint covariance is {}x{} but dims sum to {}",
                joint.dim(),
                joint.dim(),
                dim
            )));
        }
        check_psd(&joint, "joint covariance")?;
        if let Some(channel) = &disclosure_channel {
            if channel.gain.ncols() != dim_x {
                return Err(Error::Model(format!(
                    "disclosure gain has {} columns but X has dimension {}",
                    channel.gain.ncols(),
                    dim_x
                )));
            }
            if channel.noise.dim() != channel.gain.nrows() {
                return Err(Error::Model(format!(
                    "disclosure noise is {}x{} but the gain has {} rows",
                    channel.noise.dim(),
                    channel.noise.dim(),
                    channel.gain.nrows()
                )));
            }
            if channel.gain.iter().any(|v| !v.is_finite()) {
                return Err(Error::Model("disclosure gain has a non-finite entry".into()));
            }
            check_psd(&channel.noise, "disclosure noise covariance")?;
        }
        Ok(GaussianModel {
            dim_x,
            dim_y,
            dim_u,
            joint,
            disclosure_channel,
        })
    }

    pub fn dim_x(&self) -> usize {
        self.dim_x
    }

    pub fn dim_y(&self) -> usize {
        self.dim_y
    }

    pub fn dim_u(&self) -> usize {
        self.dim_u
    }

    pub fn joint(&self) -> &SymMatrix {
        &self.joint
    }

    pub fn disclosure_channel(&self) -> Option<&DisclosureChannel> {
        self.disclosure_channel.as_ref()
    }

    pub fn x_indices(&self) -> Vec<usize> {
        (0..self.dim_x).collect()
    }

    pub fn y_indices(&self) -> Vec<usize> {
        (self.dim_x..self.dim_x + self.dim_y).collect()
    }

    pub fn u_indices(&self) -> Vec<usize> {
        (self.dim_x + self.dim_y..self.dim_x + self.dim_y + self.dim_u).collect()
    }

    pub fn sigma_x(&self) -> SymMatrix {
        self.principal_block(&self.x_indices())
    }

    pub fn sigma_y(&self) -> SymMatrix {
        self.principal_block(&self.y_indices())
    }

    pub fn sigma_u(&self) -> SymMatrix {
        self.principal_block(&self.u_indices())
    }

    pub fn sigma_xy(&self) -> Array2<f64> {
        self.cross_block(&self.x_indices(), &self.y_indices())
    }

    pub fn sigma_xu(&self) -> Array2<f64> {
        self.cross_block(&self.x_indices(), &self.u_indices())
    }

    pub fn sigma_yu(&self) -> Array2<f64> {
        self.cross_block(&self.y_indices(), &self.u_indices())
    }

    /// Model over `(D_x, Y, U)` where `D_x = gain·X + N` is the channel
    /// output: the disclosure takes the place of the `X` block. Errors when
    /// the model carries no channel.
    pub fn disclosure_joint(&self) -> Result<GaussianModel> {
        let channel = self.disclosure_channel.as_ref().ok_or_else(|| {
            Error::Model("model has no disclosure channel to evaluate".into())
        })?;
        let g = &channel.gain;
        let m = g.nrows();
        let (dy, du) = (self.dim_y, self.dim_u);
        let dim = m + dy + du;

        let sigma_d = g.dot(self.sigma_x().as_array()).dot(&g.t()) + channel.noise.as_array();
        let sigma_dy = g.dot(&self.sigma_xy());
        let sigma_du = g.dot(&self.sigma_xu());

        let mut joint = Array2::zeros((dim, dim));
        joint.slice_mut(s![..m, ..m]).assign(&sigma_d);
        joint.slice_mut(s![..m, m..m + dy]).assign(&sigma_dy);
        joint.slice_mut(s![..m, m + dy..]).assign(&sigma_du);
        joint
            .slice_mut(s![m..m + dy, m..m + dy])
            .assign(self.sigma_y().as_array());
        joint
            .slice_mut(s![m..m + dy, m + dy..])
            .assign(&self.sigma_yu());
        joint
            .slice_mut(s![m + dy.., m + dy..])
            .assign(self.sigma_u().as_array());
        for i in 0..dim {
            for j in 0..i {
                joint[(i, j)] = joint[(j, i)];
            }
        }
        GaussianModel::new(m, dy, du, SymMatrix::from_computed(joint), None)
    }

    fn principal_block(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix::from_computed(self.cross_block(idx, idx))
    }

    fn cross_block(&self, rows: &[usize], cols: &[usize]) -> Array2<f64> {
        let a = self.joint.as_array();
        Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| a[(rows[i], cols[j])])
    }
}

fn check_psd(m: &SymMatrix, context: &str) -> Result<()> {
    let eig = eig_sym_labeled(m, context)?;
    let scale = eig
        .eigenvalues
        .first()
        .map(|v| v.abs())
        .unwrap_or(0.0)
        .max(eig.eigenvalues.last().map(|v| v.abs()).unwrap_or(0.0));
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -RANK_TOL * scale {
            return Err(Error::Model(format!(
                "{context} is not positive semi-definite (eigenvalue {min:.6e})"
            )));
        }
    }
    Ok(())
}

/// Correlation spectrum of a pair of jointly Gaussian blocks.
///
/// `rho` holds the canonical correlations in `[0, 1]`, sorted descending,
/// with length `min(r_a, r_b)` (zero entries are retained). The whitening
/// transforms map the pair into coordinates where both marginal covariances
/// become `diag(I_r, 0)` and the cross-covariance becomes the rectangular
/// diagonal of `rho`.
#[derive(Debug, Clone)]
pub struct CorrelationSpectrum {
    pub rho: Vec<f64>,
    /// Rank of the first block's covariance.
    pub r_a: usize,
    /// Rank of the second block's covariance.
    pub r_b: usize,
    /// `dim_a x dim_a` transform applied to the first block.
    pub whiten_a: Array2<f64>,
    /// `dim_b x dim_b` transform applied to the second block.
    pub whiten_b: Array2<f64>,
}

/// Canonical correlations of the pair `(A, B)` with covariances `sigma_a`,
/// `sigma_b` and cross-covariance `sigma_ab`, via SVD of the whitened cross
/// block. Values may exceed 1 by at most [`CORRELATION_CLAMP_TOL`] (and are
/// clamped); more than that means the assembled joint is not a covariance.
pub fn correlation_spectrum(
    sigma_a: &SymMatrix,
    sigma_b: &SymMatrix,
    sigma_ab: &Array2<f64>,
) -> Result<CorrelationSpectrum> {
    let (da, db) = (sigma_a.dim(), sigma_b.dim());
    if sigma_ab.dim() != (da, db) {
        return Err(Error::Argument(format!(
            "cross-covariance is {}x{}, expected {da}x{db}",
            sigma_ab.nrows(),
            sigma_ab.ncols()
        )));
    }

    // The pair must assemble into one PSD joint covariance.
    let mut assembled = Array2::zeros((da + db, da + db));
    assembled.slice_mut(s![..da, ..da]).assign(sigma_a.as_array());
    assembled.slice_mut(s![da.., da..]).assign(sigma_b.as_array());
    assembled.slice_mut(s![..da, da..]).assign(sigma_ab);
    assembled.slice_mut(s![da.., ..da]).assign(&sigma_ab.t());
    check_psd(
        &SymMatrix::from_computed(assembled),
        "assembled pair covariance",
    )
    .map_err(|_| Error::Model("assembled pair covariance is not positive semi-definite".into()))?;

    let (w0_a, r_a) = eigen_whitener(sigma_a, "first block covariance")?;
    let (w0_b, r_b) = eigen_whitener(sigma_b, "second block covariance")?;

    // Whitened cross-covariance; only the top-left r_a x r_b block can be
    // nonzero, and its singular values are the canonical correlations.
    let c_full = w0_a.dot(sigma_ab).dot(&w0_b.t());
    let core = c_full.slice(s![..r_a, ..r_b]).to_owned();
    let dec = svd(&core)?;

    let mut rho = Vec::with_capacity(r_a.min(r_b));
    for &sv in &dec.singular_values {
        if sv > 1.0 + CORRELATION_CLAMP_TOL {
            return Err(Error::Model(format!(
                "canonical correlation {sv:.12} exceeds 1 beyond tolerance"
            )));
        }
        // A correlation within the rank tolerance of 1 means the whitened
        // pair covariance loses rank — an almost-sure linear relation.
        // Report it as exactly 1 so rank-based and spectrum-based routes
        // agree on which components are degenerate.
        let sv = sv.min(1.0);
        rho.push(if sv >= 1.0 - RANK_TOL { 1.0 } else { sv });
    }

    // Rotate the range coordinates so the cross block becomes diagonal; null
    // coordinates are left untouched.
    let whiten_a = apply_range_rotation(&dec.left, &w0_a, r_a);
    let whiten_b = apply_range_rotation(&dec.right, &w0_b, r_b);

    Ok(CorrelationSpectrum {
        rho,
        r_a,
        r_b,
        whiten_a,
        whiten_b,
    })
}

/// Eigen-ordered whitening transform: rows `0..r` map the block to unit
/// variance along its range, rows `r..` are the null-space eigenvectors left
/// at unit scale (their coordinates vanish almost surely). The result is
/// invertible and turns the covariance into `diag(I_r, 0)` exactly.
fn eigen_whitener(sigma: &SymMatrix, context: &str) -> Result<(Array2<f64>, usize)> {
    let eig = eig_sym_labeled(sigma, context)?;
    let scale = eig
        .eigenvalues
        .first()
        .map(|v| v.abs())
        .unwrap_or(0.0)
        .max(eig.eigenvalues.last().map(|v| v.abs()).unwrap_or(0.0));
    if let Some(&min) = eig.eigenvalues.last() {
        if min < -RANK_TOL * scale {
            return Err(Error::Model(format!(
                "{context} is not positive semi-definite (eigenvalue {min:.6e})"
            )));
        }
    }
    let n = sigma.dim();
    let r = eig.rank;
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        let row_scale = if i < r {
            1.0 / eig.eigenvalues[i].sqrt()
        } else {
            1.0
        };
        for j in 0..n {
            w[(i, j)] = eig.eigenvectors[(j, i)] * row_scale;
        }
    }
    Ok((w, r))
}

fn apply_range_rotation(rotation: &Array2<f64>, w0: &Array2<f64>, r: usize) -> Array2<f64> {
    let n = w0.nrows();
    let mut block = Array2::eye(n);
    block
        .slice_mut(s![..r, ..r])
        .assign(&rotation.t().slice(s![..r, ..r]));
    block.dot(w0)
}

/// The two spectra the rate region is built from: the plain correlation
/// spectrum of `(X, U)` and the conditional spectrum of `(X, Y)` given `U`.
///
/// The conditional covariance of a Gaussian vector does not depend on the
/// value conditioned on, so each spectrum is a single deterministic vector.
pub fn conditional_spectra(model: &GaussianModel) -> Result<(Vec<f64>, Vec<f64>)> {
    let rho_xu = correlation_spectrum(&model.sigma_x(), &model.sigma_u(), &model.sigma_xu())?.rho;

    let xy_idx: Vec<usize> = model
        .x_indices()
        .into_iter()
        .chain(model.y_indices())
        .collect();
    let cond = schur_conditional_cleaned(model.joint(), &xy_idx, &model.u_indices())?;
    let dx = model.dim_x();
    let arr = cond.as_array();
    let sigma_x_u = SymMatrix::from_computed(arr.slice(s![..dx, ..dx]).to_owned());
    let sigma_y_u = SymMatrix::from_computed(arr.slice(s![dx.., dx..]).to_owned());
    let sigma_xy_u = arr.slice(s![..dx, dx..]).to_owned();
    let rho_xy_u = correlation_spectrum(&sigma_x_u, &sigma_y_u, &sigma_xy_u)?.rho;

    Ok((rho_xu, rho_xy_u))
}

/// Linear MMSE estimator matrix `M` with `E[X | Y] = M Y`, composed from the
/// pseudo square roots so singular observation covariances are handled:
/// `M = Σ_X^{1/2} · (Σ_X^{-1/2} Σ_XY Σ_Y^{-1/2}) · Σ_Y^{-1/2}`.
pub fn mmse_estimate(
    sigma_x: &SymMatrix,
    sigma_y: &SymMatrix,
    sigma_xy: &Array2<f64>,
) -> Result<Array2<f64>> {
    if sigma_xy.dim() != (sigma_x.dim(), sigma_y.dim()) {
        return Err(Error::Argument(format!(
            "cross-covariance is {}x{}, expected {}x{}",
            sigma_xy.nrows(),
            sigma_xy.ncols(),
            sigma_x.dim(),
            sigma_y.dim()
        )));
    }
    let x_half = crate::matgauss::pseudo_sqrt(sigma_x)?;
    let x_inv_half = crate::matgauss::pseudo_inv_sqrt(sigma_x)?;
    let y_inv_half = crate::matgauss::pseudo_inv_sqrt(sigma_y)?;
    let corr = x_inv_half
        .as_array()
        .dot(sigma_xy)
        .dot(y_inv_half.as_array());
    Ok(x_half.as_array().dot(&corr).dot(y_inv_half.as_array()))
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

    fn scalar_pair(rho: f64) -> (SymMatrix, SymMatrix, Array2<f64>) {
        (
            SymMatrix::identity(1),
            SymMatrix::identity(1),
            Array2::from_elem((1, 1), rho),
        )
    }

    #[test]
    fn scalar_spectrum_with_unequal_variances() {
        // var(A) = 4, var(B) = 9, cov = 3 -> correlation 0.5.
        let sa = SymMatrix::from_diag(&[4.0]);
        let sb = SymMatrix::from_diag(&[9.0]);
        let sab = Array2::from_elem((1, 1), 3.0);
        let sp = correlation_spectrum(&sa, &sb, &sab).unwrap();
        assert_eq!(sp.rho.len(), 1);
        assert_abs_diff_eq!(sp.rho[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sp.whiten_a[(0, 0)].abs(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(sp.whiten_b[(0, 0)].abs(), 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_blocks_have_unit_correlation() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 2.0]]).unwrap();
        let sp = correlation_spectrum(&s, &s, s.as_array()).unwrap();
        assert_eq!(sp.rho.len(), 2);
        for &r in &sp.rho {
            assert_abs_diff_eq!(r, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn independent_blocks_have_zero_spectrum() {
        let sa = SymMatrix::identity(2);
        let sb = SymMatrix::identity(3);
        let sab = Array2::zeros((2, 3));
        let sp = correlation_spectrum(&sa, &sb, &sab).unwrap();
        assert_eq!(sp.rho.len(), 2);
        assert!(sp.rho.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn empty_second_block_gives_empty_spectrum() {
        let sa = SymMatrix::identity(2);
        let sb = SymMatrix::zeros(0);
        let sab = Array2::zeros((2, 0));
        let sp = correlation_spectrum(&sa, &sb, &sab).unwrap();
        assert!(sp.rho.is_empty());
        assert_eq!(sp.r_b, 0);
    }

    #[test]
    fn inconsistent_pair_is_rejected() {
        // Correlation 1.5 cannot come from a covariance.
        let (sa, sb, _) = scalar_pair(0.5);
        let bad = Array2::from_elem((1, 1), 1.5);
        assert!(matches!(
            correlation_spectrum(&sa, &sb, &bad),
            Err(Error::Model(_))
        ));
    }

    fn whitening_residual(
        sp: &CorrelationSpectrum,
        sa: &SymMatrix,
        sb: &SymMatrix,
        sab: &Array2<f64>,
    ) -> f64 {
        let wa = &sp.whiten_a;
        let wb = &sp.whiten_b;
        let ta = wa.dot(sa.as_array()).dot(&wa.t());
        let tb = wb.dot(sb.as_array()).dot(&wb.t());
        let tab = wa.dot(sab).dot(&wb.t());
        let mut ia = Array2::zeros(ta.dim());
        for i in 0..sp.r_a {
            ia[(i, i)] = 1.0;
        }
        let mut ib = Array2::zeros(tb.dim());
        for i in 0..sp.r_b {
            ib[(i, i)] = 1.0;
        }
        let mut dab = Array2::zeros(tab.dim());
        for (i, &r) in sp.rho.iter().enumerate() {
            dab[(i, i)] = r;
        }
        max_abs_diff(&ta, &ia)
            .max(max_abs_diff(&tb, &ib))
            .max(max_abs_diff(&tab, &dab))
    }

    #[test]
    fn whitening_diagonalizes_a_fixed_pair() {
        let sa = SymMatrix::from_rows(&[vec![2.0, 0.4], vec![0.4, 1.0]]).unwrap();
        let sb = SymMatrix::from_rows(&[vec![1.5, -0.2], vec![-0.2, 0.8]]).unwrap();
        let sab =
            Array2::from_shape_vec((2, 2), vec![0.3, 0.1, -0.2, 0.4]).unwrap();
        // Scale the cross block down so the assembled joint stays PSD.
        let sab = sab.mapv(|v| 0.5 * v);
        let sp = correlation_spectrum(&sa, &sb, &sab).unwrap();
        assert!(whitening_residual(&sp, &sa, &sb, &sab) < 1e-8);
        for w in sp.rho.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn model_requires_consistent_dimensions() {
        let joint = SymMatrix::identity(3);
        assert!(GaussianModel::new(1, 1, 0, joint.clone(), None).is_err());
        assert!(GaussianModel::new(1, 1, 1, joint, None).is_ok());
    }

    #[test]
    fn model_rejects_indefinite_joint() {
        let joint = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(
            GaussianModel::new(1, 1, 0, joint, None),
            Err(Error::Model(_))
        ));
    }

    #[test]
    fn conditional_spectrum_scalar_partial_correlation() {
        // rho_xy = 0.6, rho_xu = 0.5, rho_yu = 0.3;
        // partial correlation (0.6 - 0.15) / sqrt(0.75 * 0.91).
        let joint = SymMatrix::from_rows(&[
            vec![1.0, 0.6, 0.5],
            vec![0.6, 1.0, 0.3],
            vec![0.5, 0.3, 1.0],
        ])
        .unwrap();
        let model = GaussianModel::new(1, 1, 1, joint, None).unwrap();
        let (rho_xu, rho_xy_u) = conditional_spectra(&model).unwrap();
        assert_eq!(rho_xu.len(), 1);
        assert_abs_diff_eq!(rho_xu[0], 0.5, epsilon = 1e-12);
        let expected = (0.6 - 0.5 * 0.3) / (0.75_f64 * 0.91).sqrt();
        assert_abs_diff_eq!(rho_xy_u[0], expected, epsilon = 1e-12);
        assert_abs_diff_eq!(expected, 0.544_704_8, epsilon = 1e-7);
    }

    #[test]
    fn empty_u_reduces_to_unconditional_spectrum() {
        let joint = SymMatrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]).unwrap();
        let model = GaussianModel::new(1, 1, 0, joint, None).unwrap();
        let (rho_xu, rho_xy_u) = conditional_spectra(&model).unwrap();
        assert!(rho_xu.is_empty());
        assert_eq!(rho_xy_u.len(), 1);
        assert_abs_diff_eq!(rho_xy_u[0], 0.6, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_on_a_copy_of_x_zeroes_the_spectrum() {
        // U = X: after conditioning nothing of X is left to correlate.
        let joint = SymMatrix::from_rows(&[
            vec![1.0, 0.6, 1.0],
            vec![0.6, 1.0, 0.6],
            vec![1.0, 0.6, 1.0],
        ])
        .unwrap();
        let model = GaussianModel::new(1, 1, 1, joint, None).unwrap();
        let (_, rho_xy_u) = conditional_spectra(&model).unwrap();
        assert!(rho_xy_u.iter().all(|&r| r.abs() < 1e-8));
    }

    #[test]
    fn mmse_scalar_cases() {
        // Independent: zero estimator.
        let m = mmse_estimate(
            &SymMatrix::identity(1),
            &SymMatrix::identity(1),
            &Array2::zeros((1, 1)),
        )
        .unwrap();
        assert_abs_diff_eq!(m[(0, 0)], 0.0, epsilon = 1e-14);

        // var(X) = 4, var(Y) = 1, correlation 0.5: slope = rho sx/sy = 1.
        let m = mmse_estimate(
            &SymMatrix::from_diag(&[4.0]),
            &SymMatrix::identity(1),
            &Array2::from_elem((1, 1), 1.0),
        )
        .unwrap();
        assert_abs_diff_eq!(m[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn mmse_identical_blocks_give_identity() {
        let s = SymMatrix::from_rows(&[vec![1.0, 0.2], vec![0.2, 0.7]]).unwrap();
        let m = mmse_estimate(&s, &s, s.as_array()).unwrap();
        assert!(max_abs_diff(&m, &Array2::eye(2)) < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        /// Whitening residual and orthogonality-principle checks on random
        /// jointly PSD pairs, including rank-deficient ones.
        #[test]
        fn whitening_and_mmse_on_random_pairs(
            da in 1usize..4,
            db in 1usize..4,
            rank in 1usize..8,
            entries in prop::collection::vec(-1.0f64..1.0, 48),
        ) {
            let dim = da + db;
            let rank = rank.min(dim);
            let g = Array2::from_shape_fn((dim, rank), |(i, j)| entries[i * rank + j]);
            let joint = g.dot(&g.t());
            let sa = SymMatrix::from_computed(joint.slice(s![..da, ..da]).to_owned());
            let sb = SymMatrix::from_computed(joint.slice(s![da.., da..]).to_owned());
            let sab = joint.slice(s![..da, da..]).to_owned();

            let sp = correlation_spectrum(&sa, &sb, &sab).unwrap();
            prop_assert!(whitening_residual(&sp, &sa, &sb, &sab) < 1e-8);
            prop_assert_eq!(sp.rho.len(), sp.r_a.min(sp.r_b));
            for &r in &sp.rho {
                prop_assert!((0.0..=1.0).contains(&r));
            }

            // Orthogonality principle: the MMSE residual is uncorrelated
            // with the observation, i.e. Σ_AB = M Σ_B.
            let m = mmse_estimate(&sa, &sb, &sab).unwrap();
            let resid = &sab - &m.dot(sb.as_array());
            let scale = sb.max_abs().max(1.0);
            prop_assert!(resid.iter().all(|v| v.abs() < 1e-8 * scale));
        }
    }
}
