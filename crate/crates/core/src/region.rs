//! Closed-form rate–key frontiers for the three disclosure cases, and
//! Wyner's common information.
//!
//! The tradeoff between communication rate `R` and secret-key rate `R0` is
//! traced by a supporting-line parameter `λ ≥ 0`. For each component of the
//! conditional correlation spectrum the optimal Gaussian auxiliary is
//! described by a single channel parameter `a ∈ [ρ², 1]` with a closed form
//! per case; rates are sums of scalar log terms over the spectra. Case one
//! (only a disclosure of `X` is revealed) has no tradeoff at all: the sweep
//! degenerates to a single corner point independent of `λ`.

use crate::error::{Error, Result};
use crate::matgauss::{gaussian_cmi_det, gaussian_mi_det, SymMatrix};
use crate::spectrum::{conditional_spectra, correlation_spectrum, GaussianModel};
use ndarray::Array2;

/// What the eavesdropper sees of `X` in the first disclosure case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XDisclosure {
    /// Nothing about `X` is revealed.
    Empty,
    /// `X` itself is revealed.
    Full,
    /// The model's noisy linear channel output of `X` is revealed.
    Channel,
}

/// The three disclosure configurations, each with its own frontier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisclosureCase {
    /// Only a disclosure of `X` (possibly empty or noisy) reaches the
    /// eavesdropper; nothing of `Y`. The frontier is a single corner point
    /// and `λ` is ignored.
    CaseOne(XDisclosure),
    /// `Y` is fully revealed, `X` is not.
    CaseTwo,
    /// Both `X` and `Y` are fully revealed.
    CaseThree,
}

/// One point of the rate–key frontier.
#[derive(Debug, Clone)]
pub struct FrontierPoint {
    /// Supporting-line parameter this point was computed at.
    pub lambda: f64,
    /// Communication rate `R` in nats.
    pub rate: f64,
    /// Secret-key rate `R0` in nats; `+∞` for degenerate components.
    pub key_rate: f64,
    /// Per-component channel parameters over the conditional spectrum, each
    /// in `[ρᵢ², 1]`; zero by convention for independent components. Empty
    /// for the first disclosure case, which has no auxiliary.
    pub a: Vec<f64>,
}

/// Channel parameter for the third disclosure case:
/// `a = (λρ² + ρ·√(λ²ρ² + 4(λ+1))) / (2(λ+1))`.
///
/// Total on `ρ ∈ [0,1]`, `λ ≥ 0`; endpoints `a(ρ, 0) = ρ` and
/// `a(ρ, λ) → ρ²` as `λ → ∞`. For `λ ≥ 1` an equivalent form in `1/λ` is
/// used so nothing overflows at extreme `λ`.
pub fn a_lambda_case3(rho: f64, lambda: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&rho));
    debug_assert!(lambda >= 0.0);
    if rho == 0.0 {
        return 0.0;
    }
    let r2 = rho * rho;
    let a = if lambda >= 1.0 {
        let il = 1.0 / lambda;
        // (λ²ρ² + 4(λ+1)) / λ² stays finite however large λ gets.
        let disc = r2 + 4.0 * il * (1.0 + il);
        (r2 + rho * disc.sqrt()) / (2.0 * (1.0 + il))
    } else {
        let disc = lambda * lambda * r2 + 4.0 * (lambda + 1.0);
        (lambda * r2 + rho * disc.sqrt()) / (2.0 * (lambda + 1.0))
    };
    a.clamp(r2, 1.0)
}

/// Channel parameter for the second disclosure case:
/// `a = ((λ−1)ρ² + √(4λρ² + (1−λ)²ρ⁴)) / (2λ)`.
///
/// The printed form is 0/0 at `λ = 0`; the rationalized form
/// `2ρ² / ((1−λ)ρ² + √(4λρ² + (1−λ)²ρ⁴))` used for `λ < 1` has no
/// cancellation and evaluates to the analytic limit 1 at `λ = 0` exactly.
/// Independent components return 0 by convention.
pub fn a_lambda_case2(rho: f64, lambda: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&rho));
    debug_assert!(lambda >= 0.0);
    if rho == 0.0 {
        return 0.0;
    }
    let r2 = rho * rho;
    let a = if lambda >= 1.0 {
        let il = 1.0 / lambda;
        let c = (1.0 - il) * r2;
        (c + (4.0 * r2 * il + c * c).sqrt()) / 2.0
    } else {
        let c = (1.0 - lambda) * r2;
        2.0 * r2 / (c + (4.0 * lambda * r2 + c * c).sqrt())
    };
    a.clamp(r2, 1.0)
}

/// Per-component scalarized objective `λ·I(X̃;V) + I(X̃,Ỹ;V)` of the
/// third-case auxiliary with channel parameter `a`:
/// `½ log[a / ((1−a)^{λ+1} (a−ρ²))] − ½ log[1/(1−ρ²)]`.
///
/// Returns `+∞` when `a ≤ ρ²` (the auxiliary would have to carry unbounded
/// information); `a > 1` is a caller error.
pub fn objective_value(rho: f64, a: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::Argument(format!(
            "correlation {rho} outside [0, 1]"
        )));
    }
    if a > 1.0 || !a.is_finite() {
        return Err(Error::Argument(format!(
            "channel parameter {a} outside ({}, 1]",
            rho * rho
        )));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Argument(format!(
            "objective weight {lambda} must be a finite nonnegative real"
        )));
    }
    let r2 = rho * rho;
    if a <= r2 {
        return Ok(f64::INFINITY);
    }
    // a = 1 makes the (1−a) factor vanish and the value +∞, which the log
    // arithmetic produces on its own.
    Ok(0.5 * (a.ln() - (lambda + 1.0) * (1.0 - a).ln() - (a - r2).ln() + (1.0 - r2).ln()))
}

/// Wyner's common information of a jointly Gaussian pair in nats:
/// `½ Σᵢ log[(1+ρᵢ)/(1−ρᵢ)]` over the canonical correlations; `+∞` when
/// some `ρᵢ = 1` (a deterministic linear relation between the blocks).
pub fn wyner_ci(
    sigma_x: &SymMatrix,
    sigma_y: &SymMatrix,
    sigma_xy: &Array2<f64>,
) -> Result<f64> {
    let spectrum = correlation_spectrum(sigma_x, sigma_y, sigma_xy)?;
    Ok(spectrum
        .rho
        .iter()
        .map(|&r| 0.5 * ((1.0 + r) / (1.0 - r)).ln())
        .sum())
}

/// Spectra a case-two/-three frontier is evaluated from: the λ-independent
/// rate floor `½ Σ log 1/(1−ρ_{XU,i}²)` plus the conditional correlations of
/// `(X, Y)` given `U`.
struct FrontierContext {
    base_rate: f64,
    rho_cond: Vec<f64>,
}

impl FrontierContext {
    fn new(model: &GaussianModel) -> Result<Self> {
        let (rho_xu, rho_cond) = conditional_spectra(model)?;
        let base_rate = rho_xu
            .iter()
            .map(|&r| 0.5 * (1.0 / (1.0 - r * r)).ln())
            .sum();
        Ok(FrontierContext {
            base_rate,
            rho_cond,
        })
    }

    fn point(&self, case: DisclosureCase, lambda: f64) -> FrontierPoint {
        let mut rate = self.base_rate;
        let mut key_rate = 0.0;
        let mut a_vec = Vec::with_capacity(self.rho_cond.len());
        for &rho in &self.rho_cond {
            if rho == 0.0 {
                // Independent component: no auxiliary, no contribution.
                a_vec.push(0.0);
                continue;
            }
            let a = match case {
                DisclosureCase::CaseTwo => a_lambda_case2(rho, lambda),
                DisclosureCase::CaseThree => a_lambda_case3(rho, lambda),
                DisclosureCase::CaseOne(_) => unreachable!("case one has no channel parameter"),
            };
            a_vec.push(a);
            rate += 0.5 * (1.0 / (1.0 - a)).ln();
            // ρ²/a ≤ 1 holds exactly, but a one-ulp overshoot at ρ = 1 would
            // turn 1 − ρ²/a negative; clamp so the limit stays +∞, not NaN.
            let ratio = (rho * rho / a).min(1.0);
            let r2 = rho * rho;
            key_rate += match case {
                DisclosureCase::CaseTwo => 0.5 * (1.0 / (1.0 - ratio)).ln(),
                DisclosureCase::CaseThree => {
                    if rho >= 1.0 {
                        // 0/0 in the closed form; a perfectly correlated
                        // continuous pair needs unbounded key.
                        f64::INFINITY
                    } else {
                        0.5 * ((1.0 - r2) / ((1.0 - a) * (1.0 - ratio))).ln()
                    }
                }
                DisclosureCase::CaseOne(_) => unreachable!(),
            };
        }
        FrontierPoint {
            lambda,
            rate,
            key_rate,
            a: a_vec,
        }
    }
}

/// Corner point of the first disclosure case: `R = I(X; U,Y)` and
/// `R0 = I(D_x; Y | U)`, both through the log-determinant route.
fn case_one_corner(model: &GaussianModel, disclosure: XDisclosure) -> Result<(f64, f64)> {
    let x_idx = model.x_indices();
    let yu_idx: Vec<usize> = model
        .y_indices()
        .into_iter()
        .chain(model.u_indices())
        .collect();
    let rate = gaussian_mi_det(model.joint(), &x_idx, &yu_idx)?;
    let key_rate = match disclosure {
        XDisclosure::Empty => 0.0,
        XDisclosure::Full => gaussian_cmi_det(
            model.joint(),
            &model.x_indices(),
            &model.y_indices(),
            &model.u_indices(),
        )?,
        XDisclosure::Channel => {
            let dj = model.disclosure_joint()?;
            gaussian_cmi_det(dj.joint(), &dj.x_indices(), &dj.y_indices(), &dj.u_indices())?
        }
    };
    Ok((rate, key_rate))
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::Argument(format!(
            "frontier parameter {lambda} must be a finite nonnegative real"
        )));
    }
    Ok(())
}

/// Single frontier point of `model` under `case` at parameter `lambda`.
pub fn frontier_point(
    model: &GaussianModel,
    case: DisclosureCase,
    lambda: f64,
) -> Result<FrontierPoint> {
    validate_lambda(lambda)?;
    match case {
        DisclosureCase::CaseOne(disclosure) => {
            let (rate, key_rate) = case_one_corner(model, disclosure)?;
            Ok(FrontierPoint {
                lambda,
                rate,
                key_rate,
                a: Vec::new(),
            })
        }
        DisclosureCase::CaseTwo | DisclosureCase::CaseThree => {
            Ok(FrontierContext::new(model)?.point(case, lambda))
        }
    }
}

/// Frontier points for every value of an ascending `lambda_grid`, in grid
/// order. The spectra are computed once and shared across the grid; the
/// first disclosure case repeats its single corner point.
pub fn frontier_sweep(
    model: &GaussianModel,
    case: DisclosureCase,
    lambda_grid: &[f64],
) -> Result<Vec<FrontierPoint>> {
    for pair in lambda_grid.windows(2) {
        if pair[1] < pair[0] {
            return Err(Error::Argument(
                "frontier parameter grid must be sorted ascending".into(),
            ));
        }
    }
    for &l in lambda_grid {
        validate_lambda(l)?;
    }
    if lambda_grid.is_empty() {
        return Ok(Vec::new());
    }
    match case {
        DisclosureCase::CaseOne(disclosure) => {
            let (rate, key_rate) = case_one_corner(model, disclosure)?;
            Ok(lambda_grid
                .iter()
                .map(|&lambda| FrontierPoint {
                    lambda,
                    rate,
                    key_rate,
                    a: Vec::new(),
                })
                .collect())
        }
        DisclosureCase::CaseTwo | DisclosureCase::CaseThree => {
            let ctx = FrontierContext::new(model)?;
            Ok(lambda_grid
                .iter()
                .map(|&lambda| ctx.point(case, lambda))
                .collect())
        }
    }
}

/// Spacing rule for a swept parameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Log,
    Linear,
}

/// Ascending grid of `steps` values from `min` to `max` with exact
/// endpoints. Log spacing needs `min > 0`; a single step needs `min = max`.
pub fn lambda_grid(min: f64, max: f64, steps: usize, spacing: GridSpacing) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite()) || min < 0.0 {
        return Err(Error::Argument(
            "grid endpoints must be finite nonnegative reals".into(),
        ));
    }
    if max < min {
        return Err(Error::Argument(format!(
            "grid upper endpoint {max} is below lower endpoint {min}"
        )));
    }
    if steps == 0 {
        return Err(Error::Argument("grid needs at least one step".into()));
    }
    if spacing == GridSpacing::Log && min == 0.0 {
        return Err(Error::Argument(
            "log-spaced grid needs a positive lower endpoint".into(),
        ));
    }
    if steps == 1 {
        if min != max {
            return Err(Error::Argument(
                "a single-step grid needs equal endpoints".into(),
            ));
        }
        return Ok(vec![min]);
    }
    let mut grid = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let v = match spacing {
            GridSpacing::Linear => min + t * (max - min),
            GridSpacing::Log => (min.ln() + t * (max.ln() - min.ln())).exp(),
        };
        grid.push(v);
    }
    grid[0] = min;
    grid[steps - 1] = max;
    Ok(grid)
}

/// Default sweep grid: 61 log-spaced points over `[1e−3, 1e3]`, wide enough
/// to cover the transition of `a` from `ρ` down to `ρ²` for any practical
/// correlation.
pub fn default_lambda_grid() -> Vec<f64> {
    lambda_grid(1e-3, 1e3, 61, GridSpacing::Log).expect("default grid parameters are valid")
}
