//! Seeded generators shared by the integration tests, so every run probes
//! the same population of models.
#![allow(dead_code)]

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ratekey::spectrum::CorrelationSpectrum;
use ratekey::{GaussianModel, SymMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn standard_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.sample(StandardNormal))
}

/// PSD matrix `G Gᵀ` from a `size × rank` standard normal factor; rank
/// below `size` gives a genuinely singular matrix.
pub fn random_psd(rng: &mut ChaCha8Rng, size: usize, rank: usize) -> SymMatrix {
    let g = standard_matrix(rng, size, rank);
    SymMatrix::new(g.dot(&g.t())).expect("G Gᵀ is symmetric")
}

/// PSD matrix whose rows `from` and `to` are bitwise identical — the
/// covariance of a vector with an exactly duplicated variable.
pub fn duplicate_row_psd(
    rng: &mut ChaCha8Rng,
    size: usize,
    from: usize,
    to: usize,
) -> SymMatrix {
    let mut g = standard_matrix(rng, size, size + 1);
    let row = g.row(from).to_owned();
    g.row_mut(to).assign(&row);
    SymMatrix::new(g.dot(&g.t())).expect("G Gᵀ is symmetric")
}

/// Random jointly Gaussian model over `(X, Y, U)` with the given factor
/// rank for the stacked covariance.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    dim_x: usize,
    dim_y: usize,
    dim_u: usize,
    rank: usize,
) -> GaussianModel {
    let joint = random_psd(rng, dim_x + dim_y + dim_u, rank);
    GaussianModel::new(dim_x, dim_y, dim_u, joint, None).expect("generated joint must be valid")
}

/// Well-conditioned invertible matrix: an orthonormal basis with per-column
/// scales in `[0.5, 2]`, so the condition number stays below 4.
pub fn random_invertible(rng: &mut ChaCha8Rng, size: usize) -> Array2<f64> {
    loop {
        let g = standard_matrix(rng, size, size);
        if let Some(mut q) = gram_schmidt(&g) {
            for j in 0..size {
                let scale = 0.5 + 1.5 * rng.gen::<f64>();
                q.column_mut(j).map_inplace(|v| *v *= scale);
            }
            return q;
        }
    }
}

fn gram_schmidt(g: &Array2<f64>) -> Option<Array2<f64>> {
    let n = g.nrows();
    let mut q = g.clone();
    for j in 0..n {
        for k in 0..j {
            let proj = q.column(j).dot(&q.column(k));
            let prev = q.column(k).to_owned();
            q.column_mut(j).scaled_add(-proj, &prev);
        }
        let nrm = q.column(j).dot(&q.column(j)).sqrt();
        if nrm < 1e-6 {
            return None;
        }
        q.column_mut(j).map_inplace(|v| *v /= nrm);
    }
    Some(q)
}

/// Block-diagonal stack of two symmetric matrices.
pub fn block_diag_sym(a: &SymMatrix, b: &SymMatrix) -> SymMatrix {
    SymMatrix::new(block_diag_rect(a.as_array(), b.as_array())).expect("blocks are symmetric")
}

/// Block-diagonal stack of two rectangular matrices, zero off the blocks.
pub fn block_diag_rect(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra + rb, ca + cb));
    out.slice_mut(ndarray::s![..ra, ..ca]).assign(a);
    out.slice_mut(ndarray::s![ra.., ca..]).assign(b);
    out
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Largest deviation of the whitened pair from its target block form:
/// both marginals must become `diag(I_r, 0)` and the cross block the
/// rectangular diagonal of the correlation spectrum.
pub fn whitening_residual(
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
