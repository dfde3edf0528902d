//! Independent verification of the closed-form frontiers.
//!
//! Everything the region module computes analytically is re-derived here by
//! a second route and compared at explicit tolerances: the channel
//! parameters against 1-D golden-section optimization, the rate
//! expressions against log-determinant mutual informations of an explicitly
//! assembled auxiliary joint covariance, the distortion identities against
//! Schur-complement residuals, and the covariance assembly itself against
//! seeded Monte Carlo sampling. Results are collected into a
//! [`VerificationReport`] of named checks with residuals and pass flags.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matgauss::{
    gaussian_cmi_det, gaussian_mi_det, pseudo_inv, schur_conditional, submatrix, SymMatrix,
};
use crate::region::{
    a_lambda_case2, a_lambda_case3, frontier_sweep, objective_value, DisclosureCase,
};
use crate::spectrum::{conditional_spectra, correlation_spectrum, GaussianModel};

/// Absolute x-tolerance of the golden-section searches.
pub const GOLDEN_XTOL: f64 = 1e-9;
/// Agreement required between closed-form parameters and the 1-D oracles.
pub const ORACLE_AGREEMENT_TOL: f64 = 1e-6;
/// Agreement required between spectrum-formula and determinant-formula MI.
pub const MI_CROSSCHECK_TOL: f64 = 1e-8;
/// Agreement required between the three objective evaluation routes.
pub const OBJECTIVE_MATCH_TOL: f64 = 1e-9;
/// Ceiling on the Markov-chain residual of a built construction.
pub const MARKOV_TOL: f64 = 1e-10;
/// Ceiling on the correlation-product identity residuals.
pub const CORRELATION_PRODUCT_TOL: f64 = 1e-10;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Scalar product `(1−x)^{λ+1} (x−ρ²) / x` on `[ρ², 1]`. Its maximizer is
/// the optimal third-case channel parameter, which makes it the 1-D oracle
/// for the closed form.
pub fn f_lambda(rho: f64, lambda: f64, x: f64) -> f64 {
    (1.0 - x).powf(lambda + 1.0) * (x - rho * rho) / x
}

/// Per-component weighted rate of the second case,
/// `λ·½ log 1/(1−a) + ½ log 1/(1−ρ²/a)`, minimized over `a`.
fn case2_objective(rho: f64, lambda: f64, a: f64) -> f64 {
    0.5 * (lambda * (1.0 / (1.0 - a)).ln() + (1.0 / (1.0 - rho * rho / a)).ln())
}

/// Golden-section maximization of a unimodal function on `[lo, hi]` to
/// absolute x-tolerance `xtol`. Only interior points are probed, so
/// endpoint singularities are harmless.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> (f64, f64) {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > xtol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Coarse grid scan that fails loudly if the objective is not unimodal:
/// the search below is only valid on single-bump functions, so a violation
/// means a broken premise, not a tolerance issue.
fn assert_unimodal(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, context: &str) {
    const POINTS: usize = 1000;
    let values: Vec<f64> = (0..=POINTS)
        .map(|k| f(lo + (hi - lo) * k as f64 / POINTS as f64))
        .collect();
    let scale = values
        .iter()
        .filter(|v| v.is_finite())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let slack = 1e-12 * scale.max(1.0);
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    for i in 0..values.len() - 1 {
        let rising = values[i + 1] >= values[i] - slack;
        let falling = values[i + 1] <= values[i] + slack;
        assert!(
            if i < peak { rising } else { falling },
            "{context}: objective is not unimodal near x = {}",
            lo + (hi - lo) * i as f64 / POINTS as f64
        );
    }
}

/// Numerical argmax of [`f_lambda`] on `[ρ², 1]`, with the maximum value.
/// Requires `0 < ρ < 1` and `λ ≥ 0`.
pub fn maximize_f_lambda(rho: f64, lambda: f64) -> (f64, f64) {
    debug_assert!(0.0 < rho && rho < 1.0 && lambda >= 0.0);
    let f = |x: f64| f_lambda(rho, lambda, x);
    assert_unimodal(&f, rho * rho, 1.0, "third-case oracle");
    golden_max(f, rho * rho, 1.0, GOLDEN_XTOL)
}

/// Numerical argmin of the second-case weighted rate on `(ρ², 1]`, with the
/// minimum value. Requires `0 < ρ < 1` and `λ > 0`.
pub fn minimize_case2_objective(rho: f64, lambda: f64) -> (f64, f64) {
    debug_assert!(0.0 < rho && rho < 1.0 && lambda > 0.0);
    let neg = |a: f64| -case2_objective(rho, lambda, a);
    assert_unimodal(&neg, rho * rho, 1.0, "second-case oracle");
    let (x, v) = golden_max(neg, rho * rho, 1.0, GOLDEN_XTOL);
    (x, -v)
}

/// Explicit Gaussian auxiliary: unit-variance components
/// `X̃ᵢ = √aᵢ·Vᵢ + √(1−aᵢ)·Z₁ᵢ` and `Ỹᵢ = √bᵢ·Vᵢ + √(1−bᵢ)·Z₂ᵢ` with
/// `V, Z₁, Z₂` independent standard normal vectors, stored as the joint
/// covariance over `(X̃, Ỹ, V)`.
#[derive(Debug, Clone)]
pub struct AuxConstruction {
    r: usize,
    rho: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
    joint: SymMatrix,
}

impl AuxConstruction {
    /// Assemble the joint covariance from arbitrary per-component gains.
    /// Consistency (`√(aᵢbᵢ) = ρᵢ`, the Markov chain, the distortion
    /// identities) is *not* enforced here — it is what the checks measure —
    /// so deliberately perturbed constructions can be probed too.
    pub fn with_parameters(rho: &[f64], a: &[f64], b: &[f64]) -> Result<Self> {
        let r = rho.len();
        if a.len() != r || b.len() != r {
            return Err(Error::Argument(format!(
                "component counts disagree: {r} correlations, {} / {} gains",
                a.len(),
                b.len()
            )));
        }
        for (name, v) in [("correlation", rho), ("first gain", a), ("second gain", b)] {
            if let Some(bad) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(Error::Argument(format!("{name} {bad} outside [0, 1]")));
            }
        }
        let mut joint = Array2::eye(3 * r);
        for i in 0..r {
            for (p, q, value) in [
                (i, r + i, rho[i]),
                (i, 2 * r + i, a[i].sqrt()),
                (r + i, 2 * r + i, b[i].sqrt()),
            ] {
                joint[(p, q)] = value;
                joint[(q, p)] = value;
            }
        }
        Ok(AuxConstruction {
            r,
            rho: rho.to_vec(),
            a: a.to_vec(),
            b: b.to_vec(),
            joint: SymMatrix::from_computed(joint),
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn joint(&self) -> &SymMatrix {
        &self.joint
    }

    pub fn x_indices(&self) -> Vec<usize> {
        (0..self.r).collect()
    }

    pub fn y_indices(&self) -> Vec<usize> {
        (self.r..2 * self.r).collect()
    }

    pub fn v_indices(&self) -> Vec<usize> {
        (2 * self.r..3 * self.r).collect()
    }

    /// Largest violation of the chain `X̃ − V − Ỹ`, measured on the joint:
    /// `max |Σ_{X̃Ỹ} − Σ_{X̃V} Σ_V⁻¹ Σ_{VỸ}|`.
    pub fn markov_residual(&self) -> Result<f64> {
        let arr = self.joint.as_array();
        let sxy = submatrix(arr, &self.x_indices(), &self.y_indices());
        let sxv = submatrix(arr, &self.x_indices(), &self.v_indices());
        let svy = submatrix(arr, &self.v_indices(), &self.y_indices());
        let sv = SymMatrix::from_computed(submatrix(arr, &self.v_indices(), &self.v_indices()));
        let through_v = sxv.dot(pseudo_inv(&sv)?.as_array()).dot(&svy);
        Ok(sxy
            .iter()
            .zip(through_v.iter())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs())))
    }

    /// Per-component minimum mean-square errors of estimating `X̃ᵢ` and
    /// `Ỹᵢ` from `V`, read off the conditional covariances of the joint
    /// (not from the stored gains). Tiny negative rounding is clipped so
    /// fractional powers of the distortions stay real.
    pub fn distortions(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let dx = schur_conditional(&self.joint, &self.x_indices(), &self.v_indices())?;
        let dy = schur_conditional(&self.joint, &self.y_indices(), &self.v_indices())?;
        let diag = |m: &SymMatrix| (0..m.dim()).map(|i| m.get(i, i).max(0.0)).collect();
        Ok((diag(&dx), diag(&dy)))
    }

    /// Indices of perfectly correlated components, which force `a = b = 1`
    /// and make every rate against `V` infinite.
    pub fn degenerate_components(&self) -> Vec<usize> {
        (0..self.r).filter(|&i| self.rho[i] >= 1.0).collect()
    }
}

/// Build the optimal auxiliary for a correlation spectrum at parameter `λ`:
/// `aᵢ` from the case's closed form, `bᵢ = ρᵢ²/aᵢ` (zero for independent
/// components). Only the second and third cases carry an auxiliary.
pub fn build_construction(
    rho: &[f64],
    lambda: f64,
    case: DisclosureCase,
) -> Result<AuxConstruction> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Argument(format!(
            "construction parameter {lambda} must be a finite nonnegative real"
        )));
    }
    if let Some(bad) = rho.iter().find(|x| !(0.0..=1.0).contains(*x)) {
        return Err(Error::Argument(format!("correlation {bad} outside [0, 1]")));
    }
    let a: Vec<f64> = match case {
        DisclosureCase::CaseTwo => rho.iter().map(|&r| a_lambda_case2(r, lambda)).collect(),
        DisclosureCase::CaseThree => rho.iter().map(|&r| a_lambda_case3(r, lambda)).collect(),
        DisclosureCase::CaseOne(_) => {
            return Err(Error::Argument(
                "the first disclosure case has no auxiliary construction".into(),
            ))
        }
    };
    // ρ²/a ≤ 1 exactly since a ≥ ρ²; cap a one-ulp rounding overshoot at
    // ρ = 1 so the gain stays inside the validated range.
    let b: Vec<f64> = rho
        .iter()
        .zip(&a)
        .map(|(&r, &ai)| if r == 0.0 { 0.0 } else { (r * r / ai).min(1.0) })
        .collect();
    AuxConstruction::with_parameters(rho, &a, &b)
}

/// Objective `λ·I(X̃;V) + I(X̃,Ỹ;V)` through the determinant MI route on
/// the assembled joint — no per-component formula involved.
pub fn analytic_objective(construction: &AuxConstruction, lambda: f64) -> Result<f64> {
    let ixyv = {
        let xy: Vec<usize> = construction
            .x_indices()
            .into_iter()
            .chain(construction.y_indices())
            .collect();
        gaussian_mi_det(&construction.joint, &xy, &construction.v_indices())?
    };
    if lambda == 0.0 {
        // Avoid 0·∞ when a degenerate component makes I(X̃;V) infinite.
        return Ok(ixyv);
    }
    let ixv = gaussian_mi_det(
        &construction.joint,
        &construction.x_indices(),
        &construction.v_indices(),
    )?;
    Ok(lambda * ixv + ixyv)
}

/// The same objective as the sum of per-component closed-form values.
pub fn closed_form_objective(construction: &AuxConstruction, lambda: f64) -> Result<f64> {
    let mut total = 0.0;
    for (&rho, &a) in construction.rho.iter().zip(&construction.a) {
        if rho == 0.0 {
            continue;
        }
        total += objective_value(rho, a, lambda)?;
    }
    Ok(total)
}

/// The same objective once more, this time from the measured distortions:
/// `½ Σ log[(1−ρᵢ²) / (D_{X̃ᵢ}^{λ+1} D_{Ỹᵢ})]`. Perfectly correlated
/// components contribute `+∞`.
pub fn converse_chain_value(construction: &AuxConstruction, lambda: f64) -> Result<f64> {
    let (dx, dy) = construction.distortions()?;
    let mut total = 0.0;
    for i in 0..construction.r {
        let rho = construction.rho[i];
        if rho >= 1.0 {
            total += f64::INFINITY;
            continue;
        }
        total += 0.5 * ((1.0 - rho * rho) / (dx[i].powf(lambda + 1.0) * dy[i])).ln();
    }
    Ok(total)
}

/// One named check: `pass` holds exactly when `residual ≤ tolerance` (a NaN
/// residual never passes).
#[derive(Debug, Clone)]
pub struct CheckEntry {
    pub check: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckEntry {
    pub fn new(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        CheckEntry {
            check: check.into(),
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }
}

/// Collected checks for one model, tagged with a fingerprint of the input.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    fingerprint: String,
    entries: Vec<CheckEntry>,
}

impl VerificationReport {
    pub fn new(fingerprint: String) -> Self {
        VerificationReport {
            fingerprint,
            entries: Vec::new(),
        }
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn entries(&self) -> &[CheckEntry] {
        &self.entries
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.entries.push(entry);
    }

    pub fn extend(&mut self, entries: Vec<CheckEntry>) {
        self.entries.extend(entries);
    }

    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| !e.pass).collect()
    }

    /// Flat JSON array of `{check, residual, tolerance, pass}` objects.
    /// Non-finite reals serialize as the strings `"inf"`, `"-inf"`, `"nan"`
    /// since JSON numbers cannot carry them.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "check": e.check,
                        "residual": json_real(e.residual),
                        "tolerance": json_real(e.tolerance),
                        "pass": e.pass,
                    })
                })
                .collect(),
        )
    }
}

fn json_real(v: f64) -> serde_json::Value {
    if v.is_nan() {
        serde_json::Value::String("nan".into())
    } else if v.is_infinite() {
        serde_json::Value::String(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        serde_json::Number::from_f64(v)
            .map(serde_json::Value::Number)
            .unwrap_or_else(|| serde_json::Value::String(v.to_string()))
    }
}

/// SHA-256 over the model's dimensions, covariance entries, and disclosure
/// channel, so reports can be tied to their exact input.
pub fn model_fingerprint(model: &GaussianModel) -> String {
    let mut hasher = Sha256::new();
    for d in [model.dim_x(), model.dim_y(), model.dim_u()] {
        hasher.update((d as u64).to_le_bytes());
    }
    for v in model.joint().as_array().iter() {
        hasher.update(v.to_bits().to_le_bytes());
    }
    match model.disclosure_channel() {
        None => hasher.update([0u8]),
        Some(channel) => {
            hasher.update([1u8]);
            hasher.update((channel.gain.nrows() as u64).to_le_bytes());
            for v in channel.gain.iter() {
                hasher.update(v.to_bits().to_le_bytes());
            }
            for v in channel.noise.as_array().iter() {
                hasher.update(v.to_bits().to_le_bytes());
            }
        }
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Residual between two reals where a shared infinity counts as agreement.
fn agreement_residual(x: f64, y: f64) -> f64 {
    if x.is_infinite() && y.is_infinite() && x.signum() == y.signum() {
        0.0
    } else {
        (x - y).abs()
    }
}

/// `½ Σ log 1/(1−ρᵢ²)` — MI of a pair from its correlation spectrum.
fn mi_from_rho(rho: &[f64]) -> f64 {
    rho.iter().map(|&r| -0.5 * (1.0 - r * r).ln()).sum()
}

/// Spectrum-formula vs determinant-formula MI on the model's blocks.
pub fn mi_crosscheck_model(model: &GaussianModel) -> Result<Vec<CheckEntry>> {
    let joint = model.joint();
    let arr = joint.as_array();
    let x_idx = model.x_indices();
    let u_idx = model.u_indices();
    let yu_idx: Vec<usize> = model.y_indices().into_iter().chain(u_idx.clone()).collect();
    let mut entries = Vec::new();

    let pair_mi = |a_idx: &[usize], b_idx: &[usize]| -> Result<f64> {
        let sa = SymMatrix::from_computed(submatrix(arr, a_idx, a_idx));
        let sb = SymMatrix::from_computed(submatrix(arr, b_idx, b_idx));
        let sab = submatrix(arr, a_idx, b_idx);
        Ok(mi_from_rho(&correlation_spectrum(&sa, &sb, &sab)?.rho))
    };

    let spec = pair_mi(&x_idx, &yu_idx)?;
    let det = gaussian_mi_det(joint, &x_idx, &yu_idx)?;
    entries.push(CheckEntry::new(
        "model_mi_x_vs_yu",
        agreement_residual(spec, det),
        MI_CROSSCHECK_TOL,
    ));

    let spec = pair_mi(&x_idx, &u_idx)?;
    let det = gaussian_mi_det(joint, &x_idx, &u_idx)?;
    entries.push(CheckEntry::new(
        "model_mi_x_vs_u",
        agreement_residual(spec, det),
        MI_CROSSCHECK_TOL,
    ));

    let (_, rho_cond) = conditional_spectra(model)?;
    let spec = mi_from_rho(&rho_cond);
    let det = gaussian_cmi_det(joint, &x_idx, &model.y_indices(), &u_idx)?;
    entries.push(CheckEntry::new(
        "model_cmi_x_y_given_u",
        agreement_residual(spec, det),
        MI_CROSSCHECK_TOL,
    ));

    if model.disclosure_channel().is_some() {
        let dj = model.disclosure_joint()?;
        let (_, rho_dy) = conditional_spectra(&dj)?;
        let spec = mi_from_rho(&rho_dy);
        let det = gaussian_cmi_det(dj.joint(), &dj.x_indices(), &dj.y_indices(), &dj.u_indices())?;
        entries.push(CheckEntry::new(
            "model_cmi_dx_y_given_u",
            agreement_residual(spec, det),
            MI_CROSSCHECK_TOL,
        ));
    }
    Ok(entries)
}

/// Spectrum-formula vs determinant-formula MI of a construction's blocks
/// against its auxiliary.
pub fn mi_crosscheck_construction(construction: &AuxConstruction) -> Result<Vec<CheckEntry>> {
    let c = construction;
    let xy: Vec<usize> = c.x_indices().into_iter().chain(c.y_indices()).collect();

    let ixv_spec: f64 = c.a.iter().map(|&a| -0.5 * (1.0 - a).ln()).sum();
    let iyv_spec: f64 = c.b.iter().map(|&b| -0.5 * (1.0 - b).ln()).sum();
    let ixyv_spec: f64 = (0..c.r)
        .map(|i| {
            if c.rho[i] >= 1.0 {
                f64::INFINITY
            } else {
                0.5 * ((1.0 - c.rho[i] * c.rho[i]) / ((1.0 - c.a[i]) * (1.0 - c.b[i]))).ln()
            }
        })
        .sum();

    Ok(vec![
        CheckEntry::new(
            "construction_mi_x_vs_v",
            agreement_residual(
                ixv_spec,
                gaussian_mi_det(&c.joint, &c.x_indices(), &c.v_indices())?,
            ),
            MI_CROSSCHECK_TOL,
        ),
        CheckEntry::new(
            "construction_mi_y_vs_v",
            agreement_residual(
                iyv_spec,
                gaussian_mi_det(&c.joint, &c.y_indices(), &c.v_indices())?,
            ),
            MI_CROSSCHECK_TOL,
        ),
        CheckEntry::new(
            "construction_mi_xy_vs_v",
            agreement_residual(ixyv_spec, gaussian_mi_det(&c.joint, &xy, &c.v_indices())?),
            MI_CROSSCHECK_TOL,
        ),
    ])
}

/// The correlation-product identity `ρᵢ² ≤ (1−D_{X̃ᵢ})(1−D_{Ỹᵢ})`:
/// one entry for the two-sided equality that a tight construction attains,
/// one for the one-sided bound that must hold regardless.
pub fn check_correlation_product(construction: &AuxConstruction) -> Result<Vec<CheckEntry>> {
    let (dx, dy) = construction.distortions()?;
    let mut equality = 0.0_f64;
    let mut bound = 0.0_f64;
    for i in 0..construction.r {
        let r2 = construction.rho[i] * construction.rho[i];
        let product = (1.0 - dx[i]) * (1.0 - dy[i]);
        equality = equality.max((r2 - product).abs());
        bound = bound.max((r2 - product).max(0.0));
    }
    Ok(vec![
        CheckEntry::new("correlation_product_equality", equality, CORRELATION_PRODUCT_TOL),
        CheckEntry::new("correlation_product_bound", bound, CORRELATION_PRODUCT_TOL),
    ])
}

/// Draw `n_samples` of `(V, Z₁, Z₂)` from a seeded generator, push them
/// through the construction, and compare every empirical second moment with
/// its analytic value at five standard errors. The reported residual is the
/// worst error as a fraction of its own allowance, so the tolerance is 1.
pub fn monte_carlo_check(
    construction: &AuxConstruction,
    n_samples: usize,
    seed: u64,
) -> Result<CheckEntry> {
    if n_samples < 1000 {
        return Err(Error::Argument(format!(
            "Monte Carlo check needs at least 1000 samples, got {n_samples}"
        )));
    }
    let r = construction.r;
    let dim = 3 * r;
    let sqrt_a: Vec<f64> = construction.a.iter().map(|v| v.sqrt()).collect();
    let sqrt_ca: Vec<f64> = construction.a.iter().map(|v| (1.0 - v).sqrt()).collect();
    let sqrt_b: Vec<f64> = construction.b.iter().map(|v| v.sqrt()).collect();
    let sqrt_cb: Vec<f64> = construction.b.iter().map(|v| (1.0 - v).sqrt()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = vec![0.0_f64; dim * dim];
    let mut w = vec![0.0_f64; dim];
    let mut v = vec![0.0_f64; r];
    let mut z1 = vec![0.0_f64; r];
    let mut z2 = vec![0.0_f64; r];
    for _ in 0..n_samples {
        for slot in v.iter_mut() {
            *slot = rng.sample(StandardNormal);
        }
        for slot in z1.iter_mut() {
            *slot = rng.sample(StandardNormal);
        }
        for slot in z2.iter_mut() {
            *slot = rng.sample(StandardNormal);
        }
        for i in 0..r {
            w[i] = sqrt_a[i] * v[i] + sqrt_ca[i] * z1[i];
            w[r + i] = sqrt_b[i] * v[i] + sqrt_cb[i] * z2[i];
            w[2 * r + i] = v[i];
        }
        for i in 0..dim {
            for j in i..dim {
                sums[i * dim + j] += w[i] * w[j];
            }
        }
    }

    let n = n_samples as f64;
    let mut worst = 0.0_f64;
    for i in 0..dim {
        for j in i..dim {
            let analytic = construction.joint.get(i, j);
            let allowance = 5.0 * ((1.0 + analytic.abs()) / n).sqrt();
            worst = worst.max((sums[i * dim + j] / n - analytic).abs() / allowance);
        }
    }
    Ok(CheckEntry::new("monte_carlo_covariance", worst, 1.0))
}

/// Knobs of the full verification suite.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Ascending sweep grid; constructions are probed at its first, middle,
    /// and last values, frontier shape over the whole grid.
    pub lambda_grid: Vec<f64>,
    /// Seed of the Monte Carlo generator.
    pub seed: u64,
    /// Samples per Monte Carlo check.
    pub mc_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            lambda_grid: crate::region::default_lambda_grid(),
            seed: 0,
            mc_samples: 100_000,
        }
    }
}

fn with_prefix(mut entries: Vec<CheckEntry>, prefix: &str) -> Vec<CheckEntry> {
    for e in &mut entries {
        e.check = format!("{prefix}{}", e.check);
    }
    entries
}

/// Monotonicity and chord-convexity residuals of a swept frontier,
/// restricted to finite points; infinite rates from degenerate components
/// are excluded rather than compared.
fn frontier_shape_entries(
    model: &GaussianModel,
    case: DisclosureCase,
    grid: &[f64],
    tag: &str,
) -> Result<Vec<CheckEntry>> {
    let points = frontier_sweep(model, case, grid)?;
    let finite: Vec<_> = points
        .iter()
        .filter(|p| p.rate.is_finite() && p.key_rate.is_finite())
        .collect();

    let mut monotone = 0.0_f64;
    for pair in finite.windows(2) {
        monotone = monotone.max(pair[1].rate - pair[0].rate);
        monotone = monotone.max(pair[0].key_rate - pair[1].key_rate);
    }

    let mut slopes = Vec::new();
    for pair in finite.windows(2) {
        let dr = pair[1].rate - pair[0].rate;
        if dr < -1e-14 {
            slopes.push((pair[1].key_rate - pair[0].key_rate) / dr);
        }
    }
    let mut convex = 0.0_f64;
    for pair in slopes.windows(2) {
        convex = convex.max((pair[1] - pair[0]) / pair[0].abs().max(1.0));
    }

    Ok(vec![
        CheckEntry::new(format!("{tag}_frontier_monotone"), monotone, 1e-9),
        CheckEntry::new(format!("{tag}_frontier_convex_chords"), convex, 1e-7),
    ])
}

/// Run the whole verification suite on one model.
pub fn verify_model(model: &GaussianModel, config: &VerifyConfig) -> Result<VerificationReport> {
    if config.lambda_grid.is_empty() {
        return Err(Error::Argument("verification needs a nonempty grid".into()));
    }
    let mut report = VerificationReport::new(model_fingerprint(model));

    report.extend(mi_crosscheck_model(model)?);

    // Common information must coincide with the zero-λ objective value,
    // component by component, on the unconditional spectrum.
    let uncond = correlation_spectrum(&model.sigma_x(), &model.sigma_y(), &model.sigma_xy())?;
    let mut wyner_residual = 0.0_f64;
    for &rho in uncond.rho.iter().filter(|&&r| r > 0.0) {
        let summand = 0.5 * ((1.0 + rho) / (1.0 - rho)).ln();
        let obj = objective_value(rho, a_lambda_case3(rho, 0.0), 0.0)?;
        wyner_residual = wyner_residual.max(agreement_residual(summand, obj));
    }
    report.push(CheckEntry::new(
        "wyner_matches_zero_lambda_objective",
        wyner_residual,
        OBJECTIVE_MATCH_TOL,
    ));

    let (_, rho_cond) = conditional_spectra(model)?;
    let degenerate = rho_cond.iter().filter(|&&r| r >= 1.0).count();
    if degenerate > 0 {
        // Informational only: perfectly correlated components make rates
        // infinite but are handled, not rejected.
        report.push(CheckEntry::new(
            "degenerate_components",
            degenerate as f64,
            f64::INFINITY,
        ));
    }

    let grid = &config.lambda_grid;
    let probes = {
        let mut p = vec![grid[0], grid[grid.len() / 2], grid[grid.len() - 1]];
        p.dedup();
        p
    };

    for (case, tag) in [
        (DisclosureCase::CaseTwo, "case2"),
        (DisclosureCase::CaseThree, "case3"),
    ] {
        for &lambda in &probes {
            let prefix = format!("{tag}_lambda_{lambda}_");

            // Closed forms against the 1-D oracles, worst component.
            let mut oracle = 0.0_f64;
            for &rho in rho_cond.iter().filter(|&&r| r > 0.0 && r < 1.0) {
                match case {
                    DisclosureCase::CaseThree => {
                        let (argmax, _) = maximize_f_lambda(rho, lambda);
                        oracle = oracle.max((a_lambda_case3(rho, lambda) - argmax).abs());
                    }
                    DisclosureCase::CaseTwo if lambda > 0.0 => {
                        let (argmin, _) = minimize_case2_objective(rho, lambda);
                        oracle = oracle.max((a_lambda_case2(rho, lambda) - argmin).abs());
                    }
                    _ => {}
                }
            }
            report.push(CheckEntry::new(
                format!("{prefix}closed_form_vs_oracle"),
                oracle,
                ORACLE_AGREEMENT_TOL,
            ));

            let construction = build_construction(&rho_cond, lambda, case)?;
            report.push(CheckEntry::new(
                format!("{prefix}markov_residual"),
                construction.markov_residual()?,
                MARKOV_TOL,
            ));
            let gain_identity = construction
                .rho()
                .iter()
                .zip(construction.a().iter().zip(construction.b()))
                .fold(0.0_f64, |m, (&rho, (&a, &b))| {
                    m.max(((a * b).sqrt() - rho).abs())
                });
            report.push(CheckEntry::new(
                format!("{prefix}gain_product_identity"),
                gain_identity,
                CORRELATION_PRODUCT_TOL,
            ));
            report.extend(with_prefix(check_correlation_product(&construction)?, &prefix));

            let closed = closed_form_objective(&construction, lambda)?;
            report.push(CheckEntry::new(
                format!("{prefix}achievability_matches_closed_form"),
                agreement_residual(analytic_objective(&construction, lambda)?, closed),
                OBJECTIVE_MATCH_TOL,
            ));
            report.push(CheckEntry::new(
                format!("{prefix}converse_chain_matches_closed_form"),
                agreement_residual(converse_chain_value(&construction, lambda)?, closed),
                OBJECTIVE_MATCH_TOL,
            ));
            report.extend(with_prefix(mi_crosscheck_construction(&construction)?, &prefix));
        }

        let mid = probes[probes.len() / 2];
        let construction = build_construction(&rho_cond, mid, case)?;
        report.extend(with_prefix(
            vec![monte_carlo_check(&construction, config.mc_samples, config.seed)?],
            &format!("{tag}_"),
        ));

        report.extend(frontier_shape_entries(model, case, grid, tag)?);
    }

    Ok(report)
}
