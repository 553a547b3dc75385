//! Mean estimation with an estimated variance under a kurtosis bound: the
//! confidence budget is split between the variance estimate and the mean
//! estimate, the scale perturbation width is set to its approximately
//! optimal value, and the resulting observable interval pays only an
//! `exp(zeta/2)` factor for not knowing the variance.

use crate::error::{conditions, Error, Result};
use crate::influence::{chi_constants, InfluenceKind};
use crate::mean_catoni::{solve_mean, MeanEstimate, MeanMethod, Sample};
use crate::variance_blocks::{
    optimal_block_size, solve_variance, variance_params, zeta_bound_corollary, VarianceOptions,
    XiModeRequest,
};

/// Where the variance log-accuracy bound comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZetaSource {
    /// Closed form when its sample-size condition holds, block parameters
    /// otherwise.
    #[default]
    Auto,
    /// Closed-form bound at the approximately optimal block size.
    ClosedForm,
    /// Bound of the block parameters themselves.
    BlockParams,
}

/// Tuning quantities of the kurtosis-calibrated mean estimator.
#[derive(Debug, Clone, Copy)]
pub struct KurtosisMeanParams {
    /// Total confidence parameter; the interval holds with probability
    /// `1 - 2 epsilon`.
    pub epsilon: f64,
    /// Share of the budget spent on the variance estimate: `eps1 = y_split eps`.
    pub y_split: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
    /// Perturbation width of the scale parameter.
    pub x: f64,
    /// Variance log-accuracy bound fed into the recipe.
    pub zeta: f64,
    /// Deviation rate; the unobservable halfwidth is `sqrt(eta v / (1 - eta))`.
    pub eta: f64,
    /// `eta / (1 - eta)`.
    pub gamma: f64,
    /// Convexity constant of the influence-function comparison.
    pub a: f64,
    /// Squared-scale coefficient: `alpha_hat = sqrt(c / v_hat)`.
    pub c: f64,
    /// Block size the variance route settled on.
    pub variance_p: usize,
    /// Mode request the variance route settled on.
    pub variance_mode: XiModeRequest,
}

/// Options of the kurtosis-calibrated estimator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KurtosisOptions {
    pub zeta_source: ZetaSource,
    /// Block size override for the variance route.
    pub p: Option<usize>,
    /// Influence function of the variance criterion (the mean equation
    /// always uses the narrow one).
    pub variance_kind: Option<InfluenceKind>,
}

/// Rule-of-thumb kurtosis bound `6 n / 1000`, available once `n >= 1000`.
pub fn default_kappa_max(n: usize) -> Option<f64> {
    if n >= 1000 {
        Some(6.0 * n as f64 / 1000.0)
    } else {
        None
    }
}

fn resolve_zeta(
    n: usize,
    kappa_max: f64,
    epsilon1: f64,
    source: ZetaSource,
    p_override: Option<usize>,
) -> Result<(f64, usize, XiModeRequest)> {
    let pick_p = |eps1: f64| -> Result<usize> {
        match p_override {
            Some(p) => Ok(p),
            None => Ok(optimal_block_size(n, kappa_max.max(3.0), eps1)?.p),
        }
    };
    let closed = |eps1: f64| -> Result<(f64, usize, XiModeRequest)> {
        let z = zeta_bound_corollary(n, kappa_max, eps1)?;
        Ok((z, pick_p(eps1)?, XiModeRequest::Simple))
    };
    let block = |eps1: f64| -> Result<(f64, usize, XiModeRequest)> {
        let p = pick_p(eps1)?;
        let params = variance_params(n, p, kappa_max, eps1, XiModeRequest::Auto)?;
        Ok((params.zeta, p, XiModeRequest::Auto))
    };
    match source {
        ZetaSource::ClosedForm => closed(epsilon1),
        ZetaSource::BlockParams => block(epsilon1),
        ZetaSource::Auto => closed(epsilon1).or_else(|_| block(epsilon1)),
    }
}

/// Approximately optimal perturbation width for a given variance accuracy
/// and mean-side confidence: `x = ((2(a+1)/3) log(1/eps2))^{-1/3}
/// sinh(zeta/2)^{-2/3}`. `zeta` is floored at 1e-8 so the recipe stays
/// finite when the variance is essentially known.
pub fn approx_optimal_x(zeta: f64, epsilon2: f64) -> f64 {
    let a = chi_constants().a;
    let zeta_eff = zeta.max(1e-8);
    let l2 = (1.0 / epsilon2).ln();
    (2.0 * (a + 1.0) / 3.0 * l2).powf(-1.0 / 3.0) * (zeta_eff / 2.0).sinh().powf(-2.0 / 3.0)
}

/// Deviation rate, ratio and squared-scale coefficient for fixed `(n, x,
/// zeta, eps2)`.
fn eta_gamma_c(n: usize, x: f64, zeta: f64, epsilon2: f64) -> Result<(f64, f64, f64)> {
    let a = chi_constants().a;
    let s = (zeta / 2.0).sinh();
    let factor = 1.0 - (a + 1.0) / 3.0 * x * x * s * s;
    if factor <= 0.0 {
        return Err(Error::Infeasible {
            condition: conditions::VARIANCE_TOO_UNCERTAIN,
            detail: format!(
                "perturbation term (a+1)/3 x^2 sinh(zeta/2)^2 = {} >= 1 (zeta = {zeta})",
                1.0 - factor
            ),
        });
    }
    let entropy = f64::ln_1p(1.0 / x) + (1.0 / epsilon2).ln();
    let cosh2 = 1.0 + s * s;
    let eta = 2.0 * cosh2 * entropy / (n as f64 * factor);
    if eta >= 1.0 {
        return Err(Error::Infeasible {
            condition: conditions::VARIANCE_TOO_UNCERTAIN,
            detail: format!("deviation rate eta = {eta} reached 1"),
        });
    }
    let gamma = eta / (1.0 - eta);
    let c = 2.0 * entropy / (n as f64 * factor * (1.0 + gamma));
    Ok((eta, gamma, c))
}

/// Fixed point of the budget split: the variance share is `1/(1+x)` where
/// `x` is the approximately optimal width at the accuracy that share buys.
pub fn plugin_params(
    n: u64,
    epsilon: f64,
    kappa_max: f64,
    source: ZetaSource,
) -> Result<KurtosisMeanParams> {
    plugin_params_with(n as usize, epsilon, kappa_max, source, None)
}

pub(crate) fn plugin_params_with(
    n: usize,
    epsilon: f64,
    kappa_max: f64,
    source: ZetaSource,
    p_override: Option<usize>,
) -> Result<KurtosisMeanParams> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    let mut y_split = 0.5;
    let mut x_prev = f64::NAN;
    for _ in 0..50 {
        let epsilon1 = y_split * epsilon;
        let epsilon2 = (1.0 - y_split) * epsilon;
        let (zeta, p, mode) = resolve_zeta(n, kappa_max, epsilon1, source, p_override)?;
        let x = approx_optimal_x(zeta, epsilon2);
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Numerical(format!("perturbation width degenerated to {x}")));
        }
        if ((x - x_prev) / x).abs() <= 1e-9 {
            let (eta, gamma, c) = eta_gamma_c(n, x, zeta, epsilon2)?;
            return Ok(KurtosisMeanParams {
                epsilon,
                y_split,
                epsilon1,
                epsilon2,
                x,
                zeta,
                eta,
                gamma,
                a: chi_constants().a,
                c,
                variance_p: p,
                variance_mode: mode,
            });
        }
        x_prev = x;
        y_split = 1.0 / (1.0 + x);
    }
    Err(Error::Numerical(
        "the budget-split fixed point did not converge in 50 iterations".into(),
    ))
}

/// Observable halfwidth `sqrt(eta v_hat / (1 - eta)) exp(zeta/2)`.
pub fn halfwidth_kurtosis_observable(params: &KurtosisMeanParams, v_hat: f64) -> f64 {
    (params.eta * v_hat / (1.0 - params.eta)).sqrt() * (params.zeta / 2.0).exp()
}

/// Unobservable halfwidths at the true variance: the exact bound and its
/// outer envelope `exp(zeta)` wider.
pub fn halfwidth_kurtosis_oracle(params: &KurtosisMeanParams, v: f64) -> (f64, f64) {
    let inner = (params.eta * v / (1.0 - params.eta)).sqrt();
    (inner, inner * params.zeta.exp())
}

/// Mean estimate with estimated variance: solves the variance criterion on
/// the variance share of the budget, scales the mean equation by
/// `sqrt(c / v_hat)`, and reports the observable halfwidth. The mean
/// equation uses the narrow influence function.
pub fn estimate_mean_kurtosis(
    sample: &Sample,
    kappa_max: f64,
    epsilon: f64,
    options: &KurtosisOptions,
) -> Result<MeanEstimate> {
    let n = sample.len();
    let params = plugin_params_with(n, epsilon, kappa_max, options.zeta_source, options.p)?;
    let var_options = VarianceOptions {
        p: Some(params.variance_p),
        xi_mode: params.variance_mode,
        kind: options.variance_kind.unwrap_or(InfluenceKind::Narrow),
        tolerance: None,
    };
    let variance = solve_variance(sample, kappa_max, params.epsilon1, &var_options)?;
    let alpha_hat = (params.c / variance.v_hat).sqrt();
    let solve = solve_mean(sample, alpha_hat, InfluenceKind::Narrow, sample.default_tolerance())?;
    Ok(MeanEstimate {
        theta_hat: solve.theta,
        alpha: alpha_hat,
        kind: InfluenceKind::Narrow,
        halfwidth: Some(halfwidth_kurtosis_observable(&params, variance.v_hat)),
        iterations: solve.iterations,
        method: MeanMethod::Kurtosis,
    })
}
