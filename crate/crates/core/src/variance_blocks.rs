//! Kurtosis-calibrated M-estimation of the variance: the sample is split
//! into blocks, each block contributes its unbiased variance through the
//! influence function, and the root of the resulting criterion gives a
//! variance estimate with a two-sided log-accuracy guarantee.

use crate::distributions::unbiased_variance;
use crate::error::{conditions, Error, Result};
use crate::influence::{psi_raw, InfluenceKind};
use crate::mean_catoni::Sample;

/// Partition of `{1..n}` into `q` blocks of size `p`, the last absorbing the
/// remainder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPlan {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    ranges: Vec<std::ops::Range<usize>>,
}

impl BlockPlan {
    pub fn ranges(&self) -> &[std::ops::Range<usize>] {
        &self.ranges
    }
}

/// Split `n` observations into blocks of size `p`: `q = floor(n/p)` blocks,
/// the last one extended by the remainder `r = n - p q`.
pub fn block_plan(n: usize, p: usize) -> Result<BlockPlan> {
    if p < 2 || 2 * p > n {
        return Err(Error::InvalidParameter(format!(
            "block size must satisfy 2 <= p <= n/2, got p = {p}, n = {n}"
        )));
    }
    let q = n / p;
    let r = n - p * q;
    let mut ranges: Vec<std::ops::Range<usize>> = (0..q - 1).map(|l| l * p..(l + 1) * p).collect();
    ranges.push((q - 1) * p..n);
    Ok(BlockPlan { n, p, q, r, ranges })
}

/// Block size choice and whether clamping to the admissible range occurred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OptimalBlockSize {
    pub p: usize,
    pub clamped: bool,
}

/// Approximately optimal block size
/// `floor(sqrt(n / ((kappa - 1)(4 log(1/eps1) + 1/2))))`, clamped into
/// `[2, n/2]`.
pub fn optimal_block_size(n: usize, kappa: f64, epsilon1: f64) -> Result<OptimalBlockSize> {
    if !(kappa >= 3.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be >= 3, got {kappa}")));
    }
    let l = check_epsilon1(epsilon1)?;
    let raw = (n as f64 / ((kappa - 1.0) * (4.0 * l + 0.5))).sqrt().floor() as usize;
    let hi = (n / 2).max(2);
    let p = raw.clamp(2, hi);
    Ok(OptimalBlockSize { p, clamped: p != raw })
}

fn check_epsilon1(epsilon1: f64) -> Result<f64> {
    if !(epsilon1 > 0.0 && epsilon1 < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "epsilon1 must lie in (0, 1), got {epsilon1}"
        )));
    }
    Ok((1.0 / epsilon1).ln())
}

/// Which closed form pins the left solution `xi` of the deviation quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XiMode {
    /// Exact smaller root of the quadratic; needs the discriminant and the
    /// matching sample-size condition.
    Tight,
    /// `xi = 2y(1 + 2y)` under the simplified condition.
    Simple,
}

/// Requested mode; `Auto` tries Tight first and falls back to Simple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum XiModeRequest {
    #[default]
    Auto,
    Tight,
    Simple,
}

/// Which feasibility conditions hold at the given parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeasibilityFlags {
    pub eq41: bool,
    pub eq42: bool,
    pub eq44: bool,
}

/// Tuning quantities of the block variance estimator.
#[derive(Debug, Clone, Copy)]
pub struct VarianceParams {
    /// Per-block variance factor `kappa - 1 + 2/(p-1)`.
    pub chi: f64,
    /// Threshold subtracted inside the influence function.
    pub delta: f64,
    /// Criterion level: the estimate solves `Q(beta) = -y`.
    pub y: f64,
    /// Left root offset; the estimate satisfies `(delta - xi)/v <= beta <= delta/v`.
    pub xi: f64,
    /// Log-accuracy bound `-(1/2) log(1 - xi/delta)`.
    pub zeta: f64,
    pub xi_mode: XiMode,
    pub flags: FeasibilityFlags,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub epsilon1: f64,
    pub kappa: f64,
}

/// Tuning quantities and feasibility for the block scheme at `(n, p, kappa,
/// epsilon1)`. `kappa` is the assumed upper bound on the kurtosis.
pub fn variance_params(
    n: usize,
    p: usize,
    kappa: f64,
    epsilon1: f64,
    mode: XiModeRequest,
) -> Result<VarianceParams> {
    if !(kappa > 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must exceed 1, got {kappa}")));
    }
    let l = check_epsilon1(epsilon1)?;
    let plan = block_plan(n, p)?;
    let (q, r) = (plan.q as f64, plan.r as f64);
    let chi = kappa - 1.0 + 2.0 / (p as f64 - 1.0);
    let y = 2.0 * l / q;
    let delta = (2.0 * p as f64 * l / (chi * q)).sqrt();
    let zeta_ratio = chi / p as f64;
    let nr = n as f64 - r;

    let eq41 = q >= 8.0 * l * (1.0 + zeta_ratio) / (1.0 + (2.0 * chi * l / nr).sqrt()).powi(2);
    let eq42 = l <= (q / (4.0 * (1.0 + std::f64::consts::SQRT_2))).min(nr / (8.0 * chi));
    let eq44 = kappa >= 3.0 && l <= n as f64 / (36.0 * (kappa - 1.0)) - 0.125;
    let flags = FeasibilityFlags { eq41, eq42, eq44 };

    let disc = (1.0 + zeta_ratio * delta).powi(2) - 4.0 * (1.0 + zeta_ratio) * y;
    let xi_tight = if eq41 && disc >= 0.0 {
        Some(4.0 * y / (1.0 + zeta_ratio * delta + disc.sqrt()))
    } else {
        None
    };
    let xi_simple = if eq42 { Some(2.0 * y * (1.0 + 2.0 * y)) } else { None };
    let admissible = |xi: f64| xi > 0.0 && xi < delta;

    let (xi, xi_mode) = match mode {
        XiModeRequest::Tight => {
            let xi = xi_tight.ok_or_else(|| Error::Infeasible {
                condition: conditions::EQ_4_1,
                detail: format!(
                    "tight parameters infeasible at n={n}, p={p}, kappa={kappa}, eps1={epsilon1} \
                     (Eq. 4.1 holds: {eq41}, discriminant >= 0: {})",
                    disc >= 0.0
                ),
            })?;
            if !admissible(xi) {
                return Err(Error::Infeasible {
                    condition: conditions::XI_BELOW_DELTA,
                    detail: format!("tight xi = {xi} must lie in (0, delta = {delta})"),
                });
            }
            (xi, XiMode::Tight)
        }
        XiModeRequest::Simple => {
            let xi = xi_simple.ok_or_else(|| Error::Infeasible {
                condition: conditions::EQ_4_2,
                detail: format!(
                    "simple parameters infeasible at n={n}, p={p}, kappa={kappa}, eps1={epsilon1}"
                ),
            })?;
            if !admissible(xi) {
                return Err(Error::Infeasible {
                    condition: conditions::XI_BELOW_DELTA,
                    detail: format!("simple xi = {xi} must lie in (0, delta = {delta})"),
                });
            }
            (xi, XiMode::Simple)
        }
        XiModeRequest::Auto => {
            if let Some(xi) = xi_tight.filter(|&xi| admissible(xi)) {
                (xi, XiMode::Tight)
            } else if let Some(xi) = xi_simple.filter(|&xi| admissible(xi)) {
                (xi, XiMode::Simple)
            } else {
                return Err(Error::Infeasible {
                    condition: conditions::EQ_4_1,
                    detail: format!(
                        "no feasible parameter set at n={n}, p={p}, kappa={kappa}, eps1={epsilon1}: \
                         neither Eq. 4.1 (tight) nor Eq. 4.2 (simple) yields xi < delta{}",
                        if eq44 { "" } else { "; Eq. 4.4 fails as well" }
                    ),
                });
            }
        }
    };
    let zeta = -0.5 * f64::ln_1p(-xi / delta);
    Ok(VarianceParams {
        chi,
        delta,
        y,
        xi,
        zeta,
        xi_mode,
        flags,
        n,
        p,
        q: plan.q,
        r: plan.r,
        epsilon1,
        kappa,
    })
}

/// Unbiased variance of each block.
fn block_variances(sample: &Sample, plan: &BlockPlan) -> Vec<f64> {
    plan.ranges()
        .iter()
        .map(|range| {
            let block = &sample.values()[range.clone()];
            let mean = block.iter().sum::<f64>() / block.len() as f64;
            block.iter().map(|&y| (y - mean) * (y - mean)).sum::<f64>()
                / (block.len() - 1) as f64
        })
        .collect()
}

#[inline]
fn q_of_beta(block_vars: &[f64], beta: f64, delta: f64, kind: InfluenceKind) -> f64 {
    block_vars
        .iter()
        .map(|&v| psi_raw(kind, beta * v - delta))
        .sum::<f64>()
        / block_vars.len() as f64
}

/// Block criterion `Q(beta) = (1/q) sum_l psi(beta Vhat_l - delta)`, with
/// `Vhat_l` the unbiased variance of block `l`; non-decreasing in `beta`.
pub fn q_criterion(
    sample: &Sample,
    plan: &BlockPlan,
    beta: f64,
    delta: f64,
    kind: InfluenceKind,
) -> Result<f64> {
    if plan.n != sample.len() {
        return Err(Error::InvalidParameter(format!(
            "block plan covers {} observations, sample has {}",
            plan.n,
            sample.len()
        )));
    }
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("beta must be >= 0, got {beta}")));
    }
    if !delta.is_finite() {
        return Err(Error::Domain(format!("delta must be finite, got {delta}")));
    }
    Ok(q_of_beta(&block_variances(sample, plan), beta, delta, kind))
}

/// Options of the variance solver.
#[derive(Debug, Clone, Copy)]
pub struct VarianceOptions {
    /// Block size; the approximately optimal size when absent.
    pub p: Option<usize>,
    pub xi_mode: XiModeRequest,
    pub kind: InfluenceKind,
    /// Residual tolerance on `Q(beta) + y`; 1e-12 when absent.
    pub tolerance: Option<f64>,
}

impl Default for VarianceOptions {
    fn default() -> Self {
        VarianceOptions {
            p: None,
            xi_mode: XiModeRequest::Auto,
            kind: InfluenceKind::Narrow,
            tolerance: None,
        }
    }
}

/// Variance estimate `v_hat = sqrt(delta (delta - xi)) / beta_hat` where
/// `beta_hat` solves `Q(beta) = -y`.
#[derive(Debug, Clone, Copy)]
pub struct VarianceEstimate {
    pub beta_hat: f64,
    pub v_hat: f64,
    pub zeta: f64,
    pub params: VarianceParams,
    pub iterations: usize,
    pub fixed_point_converged: bool,
}

/// Fixed-point scheme `beta <- beta (delta - y)/(Q(beta) + delta)` from
/// `beta_0 = (delta - y)/Vhat`. Returns `None` when it stalls, leaves the
/// positive half-line, or hits the iteration budget.
fn fixed_point_variance(
    block_vars: &[f64],
    params: &VarianceParams,
    beta0: f64,
    kind: InfluenceKind,
    tol: f64,
) -> Option<(f64, usize)> {
    let mut beta = beta0;
    let mut window_best = f64::INFINITY;
    let mut window_len = 0usize;
    for iter in 0..=100usize {
        let q_val = q_of_beta(block_vars, beta, params.delta, kind);
        let resid = (q_val + params.y).abs();
        if resid <= tol {
            return Some((beta, iter));
        }
        if resid <= window_best / 2.0 {
            window_best = resid;
            window_len = 0;
        } else {
            window_len += 1;
            window_best = window_best.min(resid);
            if window_len >= 5 {
                return None;
            }
        }
        let denom = q_val + params.delta;
        if denom <= 0.0 {
            return None;
        }
        beta *= (params.delta - params.y) / denom;
        if !(beta > 0.0) || !beta.is_finite() {
            return None;
        }
    }
    None
}

/// Bracket `Q(beta) = -y` by doubling/halving from `beta0`, then bisect with
/// the midpoint-of-level-set convention.
fn bisection_variance(
    block_vars: &[f64],
    params: &VarianceParams,
    beta0: f64,
    kind: InfluenceKind,
) -> Result<f64> {
    let h = |beta: f64| q_of_beta(block_vars, beta, params.delta, kind) + params.y;
    let (mut lo, mut hi) = (beta0, beta0);
    let mut steps = 0;
    while h(lo) > 0.0 {
        lo /= 2.0;
        steps += 1;
        if steps > 200 {
            return Err(Error::Numerical("bracketing the variance criterion failed".into()));
        }
    }
    while h(hi) < 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 200 || !hi.is_finite() {
            return Err(Error::Numerical("bracketing the variance criterion failed".into()));
        }
    }
    // left edge of {h >= 0} and right edge of {h <= 0}
    let edge = |want_left: bool| -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            let val = h(mid);
            let go_right = if want_left { val < 0.0 } else { val <= 0.0 };
            if go_right {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= 1e-14 * b {
                break;
            }
        }
        0.5 * (a + b)
    };
    Ok(0.5 * (edge(true) + edge(false)))
}

/// Solve the block variance criterion at the given kurtosis bound and
/// confidence parameter.
pub fn solve_variance(
    sample: &Sample,
    kappa: f64,
    epsilon1: f64,
    options: &VarianceOptions,
) -> Result<VarianceEstimate> {
    let n = sample.len();
    let p = match options.p {
        Some(p) => p,
        None => optimal_block_size(n, kappa.max(3.0), epsilon1)?.p,
    };
    let params = variance_params(n, p, kappa, epsilon1, options.xi_mode)?;
    let plan = block_plan(n, p)?;
    let block_vars = block_variances(sample, &plan);
    if block_vars.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateData("every block variance vanishes".into()));
    }
    let v_hat_emp = unbiased_variance(sample)?;
    if v_hat_emp == 0.0 {
        return Err(Error::DegenerateData("the sample variance vanishes".into()));
    }
    // root existence: Q(0) = psi(-delta) must lie below -y, and the criterion
    // must be able to climb back above it
    let at_zero = psi_raw(options.kind, -params.delta);
    if params.y >= -at_zero {
        return Err(Error::Infeasible {
            condition: conditions::Q_ROOT_EXISTS,
            detail: format!(
                "y = {} >= -psi(-delta) = {}; the criterion has no root",
                params.y, -at_zero
            ),
        });
    }
    let tol = options.tolerance.unwrap_or(1e-12);
    let beta0 = (params.delta - params.y) / v_hat_emp;
    let (beta_hat, iterations, fixed_point_converged) =
        match fixed_point_variance(&block_vars, &params, beta0, options.kind, tol) {
            Some((beta, iters)) => (beta, iters, true),
            None => (
                bisection_variance(&block_vars, &params, beta0, options.kind)?,
                101,
                false,
            ),
        };
    let v_hat = (params.delta * (params.delta - params.xi)).sqrt() / beta_hat;
    if !v_hat.is_finite() || v_hat <= 0.0 {
        return Err(Error::Numerical(format!("variance estimate degenerated to {v_hat}")));
    }
    Ok(VarianceEstimate {
        beta_hat,
        v_hat,
        zeta: params.zeta,
        params,
        iterations,
        fixed_point_converged,
    })
}

/// Closed-form log-accuracy bound at the approximately optimal block size,
/// valid for `kappa >= 3` under Eq. 4.4; asymptotically
/// `sqrt(2 (kappa-1) log(1/eps1) / n)`.
pub fn zeta_bound_corollary(n: usize, kappa: f64, epsilon1: f64) -> Result<f64> {
    if !(kappa >= 3.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be >= 3, got {kappa}")));
    }
    let l = check_epsilon1(epsilon1)?;
    let nf = n as f64;
    let limit = nf / (36.0 * (kappa - 1.0)) - 0.125;
    if l > limit {
        return Err(Error::Infeasible {
            condition: conditions::EQ_4_4,
            detail: format!(
                "log(1/eps1) = {l:.4} exceeds n/(36(kappa-1)) - 1/8 = {limit:.4}"
            ),
        });
    }
    let u = 2.0
        * (2.0 * (kappa - 1.0) * l / nf).sqrt()
        * (4.0 * ((4.0 * l + 0.5) / ((kappa - 1.0) * nf)).sqrt()).exp();
    if u >= 1.0 {
        return Err(Error::Infeasible {
            condition: conditions::EQ_4_4,
            detail: format!("log argument 1 - {u:.4} is not positive"),
        });
    }
    Ok(-0.5 * f64::ln_1p(-u))
}

/// Log-accuracy bound used where a single number is needed: the closed form
/// when its condition holds, otherwise the tight block parameters at the
/// approximately optimal block size.
pub fn zeta_bound_auto(n: u64, kappa: f64, epsilon1: f64) -> Result<f64> {
    match zeta_bound_corollary(n as usize, kappa, epsilon1) {
        Ok(z) => Ok(z),
        Err(Error::Infeasible { .. }) => {
            let p = optimal_block_size(n as usize, kappa.max(3.0), epsilon1)?.p;
            Ok(variance_params(n as usize, p, kappa, epsilon1, XiModeRequest::Auto)?.zeta)
        }
        Err(e) => Err(e),
    }
}

/// Direct scan of the block size minimizing the tight log-accuracy bound.
pub fn minimize_zeta_over_p(n: usize, kappa: f64, epsilon1: f64) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for p in 2..=(n / 2).max(2) {
        if let Ok(params) = variance_params(n, p, kappa, epsilon1, XiModeRequest::Auto) {
            if best.is_none_or(|(_, z)| params.zeta < z) {
                best = Some((p, params.zeta));
            }
        }
    }
    best.ok_or_else(|| Error::Infeasible {
        condition: conditions::EQ_4_1,
        detail: format!("no feasible block size at n={n}, kappa={kappa}, eps1={epsilon1}"),
    })
}
