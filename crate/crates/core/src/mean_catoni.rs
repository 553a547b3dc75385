//! M-estimation of the mean: the empirical criterion, its root solver, and
//! the tuning recipes for a known variance bound, plus the naive
//! variance-plug-in variant.
//!
//! The estimate is the root of the non-increasing criterion
//! `r(theta) = (1/(alpha n)) sum psi(alpha (Y_i - theta))`, which satisfies
//! `r(min Y) >= 0 >= r(max Y)`. The solver runs the fixed-point scheme
//! `theta <- theta + r(theta)` from the empirical mean and falls back to
//! bisection when the residual stalls; with the narrow influence function
//! the zero set can be a flat interval, which the bisection path resolves
//! to its midpoint.

use crate::distributions;
use crate::error::{conditions, Error, Result};
use crate::influence::{psi_raw, InfluenceKind};

/// Validated statistical input: a non-empty list of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("sample must not be empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("sample contains non-finite value {bad}")));
        }
        Ok(Sample { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false: emptiness is rejected at construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()))
    }

    /// Scale-aware default solver tolerance: `1e-10 (1 + max |Y_i|)`.
    pub fn default_tolerance(&self) -> f64 {
        1e-10 * (1.0 + self.max_abs())
    }
}

/// How the scale parameter is tied to the confidence parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaMode {
    /// Scale tuned for one target confidence level.
    EpsDependent,
    /// Scale independent of the confidence level: `alpha = sqrt(2/(n v))`.
    EpsFree,
}

/// Which recipe produced a mean estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanMethod {
    KnownVariance,
    EpsFree,
    PlugIn,
    Lepski,
    Kurtosis,
}

impl MeanMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            MeanMethod::KnownVariance => "known-v",
            MeanMethod::EpsFree => "eps-free",
            MeanMethod::PlugIn => "plugin",
            MeanMethod::Lepski => "lepski",
            MeanMethod::Kurtosis => "kurtosis",
        }
    }
}

/// Root of the empirical criterion together with its tuning and, when the
/// method provides one, the observable deviation bound.
#[derive(Debug, Clone, Copy)]
pub struct MeanEstimate {
    pub theta_hat: f64,
    pub alpha: f64,
    pub kind: InfluenceKind,
    pub halfwidth: Option<f64>,
    pub iterations: usize,
    pub method: MeanMethod,
}

/// Root-solve outcome before any estimator packaging.
#[derive(Debug, Clone, Copy)]
pub struct MeanSolve {
    pub theta: f64,
    /// Fixed-point iterations performed.
    pub iterations: usize,
    /// Whether the fixed-point scheme converged on its own (no bisection).
    pub fixed_point_converged: bool,
}

/// Empirical criterion `r(theta) = (1/(alpha n)) sum psi(alpha (Y_i - theta))`,
/// non-increasing in `theta`.
pub fn criterion(sample: &Sample, alpha: f64, kind: InfluenceKind, theta: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be finite, got {theta}")));
    }
    Ok(criterion_raw(sample, alpha, kind, theta))
}

#[inline]
pub(crate) fn criterion_raw(sample: &Sample, alpha: f64, kind: InfluenceKind, theta: f64) -> f64 {
    let sum: f64 = sample
        .values
        .iter()
        .map(|&y| psi_raw(kind, alpha * (y - theta)))
        .sum();
    sum / (alpha * sample.len() as f64)
}

/// Fixed-point scheme `theta <- theta + r(theta)` from the empirical mean.
/// Returns the iterate and iteration count when the residual drops below
/// `tol` within the iteration budget, `None` when it stalls (no factor-2
/// residual shrink over any 5 consecutive iterations) or diverges.
pub fn fixed_point_mean(
    sample: &Sample,
    alpha: f64,
    kind: InfluenceKind,
    tol: f64,
) -> Result<Option<(f64, usize)>> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let (lo, hi) = (sample.min(), sample.max());
    let mut theta = distributions::empirical_mean(sample);
    let mut window_best = f64::INFINITY;
    let mut window_len = 0usize;
    for iter in 0..=100usize {
        let r = criterion_raw(sample, alpha, kind, theta);
        let resid = r.abs();
        if resid <= tol {
            return Ok(Some((theta, iter)));
        }
        // stall guard: the residual must halve within any 5 consecutive steps
        if resid <= window_best / 2.0 {
            window_best = resid;
            window_len = 0;
        } else {
            window_len += 1;
            window_best = window_best.min(resid);
            if window_len >= 5 {
                return Ok(None);
            }
        }
        theta = (theta + r).clamp(lo, hi);
    }
    Ok(None)
}

/// Midpoint of the zero interval of `r`, localized by two edge bisections
/// over `[min Y, max Y]`. Handles both a unique root and the flat zero sets
/// of the narrow influence function.
fn bisection_mean(sample: &Sample, alpha: f64, kind: InfluenceKind, tol: f64) -> f64 {
    let (lo, hi) = (sample.min(), sample.max());
    if lo == hi {
        return lo;
    }
    let r = |theta: f64| criterion_raw(sample, alpha, kind, theta);
    // left edge: boundary between {r > 0} and {r <= 0}
    let left = {
        let (mut a, mut b) = (lo, hi);
        if r(a) <= 0.0 {
            a
        } else {
            for _ in 0..200 {
                if b - a <= tol {
                    break;
                }
                let mid = 0.5 * (a + b);
                if r(mid) <= 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        }
    };
    // right edge: boundary between {r >= 0} and {r < 0}
    let right = {
        if r(hi) >= 0.0 {
            hi
        } else {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                if b - a <= tol {
                    break;
                }
                let mid = 0.5 * (a + b);
                if r(mid) >= 0.0 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            0.5 * (a + b)
        }
    };
    0.5 * (left.min(right) + left.max(right))
}

/// Solve `r(theta) = 0`. The result satisfies `|r(theta)| <= tol` or is the
/// midpoint of the bisection-localized zero interval of width `<= tol`;
/// either way it lies in `[min Y, max Y]`.
pub fn solve_mean(sample: &Sample, alpha: f64, kind: InfluenceKind, tol: f64) -> Result<MeanSolve> {
    if sample.min() == sample.max() {
        return Ok(MeanSolve { theta: sample.values[0], iterations: 0, fixed_point_converged: true });
    }
    match fixed_point_mean(sample, alpha, kind, tol)? {
        Some((theta, iterations)) => Ok(MeanSolve { theta, iterations, fixed_point_converged: true }),
        None => Ok(MeanSolve {
            theta: bisection_mean(sample, alpha, kind, tol),
            iterations: 101,
            fixed_point_converged: false,
        }),
    }
}

fn check_epsilon(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    Ok((1.0 / epsilon).ln())
}

fn check_variance(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!("variance must be positive, got {v}")));
    }
    Ok(())
}

/// Scale parameter for a known variance bound.
pub fn alpha_known_variance(n: u64, v: f64, epsilon: f64, mode: AlphaMode) -> Result<f64> {
    check_variance(v)?;
    let l = check_epsilon(epsilon)?;
    let nf = n as f64;
    match mode {
        AlphaMode::EpsDependent => {
            if nf <= 2.0 * l {
                return Err(Error::Infeasible {
                    condition: conditions::SAMPLE_SIZE_EPS_DEPENDENT,
                    detail: format!("n = {n}, need n >= {}", (2.0 * l).floor() as u64 + 1),
                });
            }
            let eta2 = 2.0 * v * l / (nf * (1.0 - 2.0 * l / nf));
            Ok((2.0 * l / (nf * (v + eta2))).sqrt())
        }
        AlphaMode::EpsFree => {
            if nf <= 2.0 * (1.0 + l) {
                return Err(Error::Infeasible {
                    condition: conditions::SAMPLE_SIZE_EPS_FREE,
                    detail: format!("n = {n}, need n >= {}", (2.0 * (1.0 + l)).floor() as u64 + 1),
                });
            }
            Ok((2.0 / (nf * v)).sqrt())
        }
    }
}

/// Deviation bound paired with `alpha_known_variance`: the estimate lies
/// within this halfwidth of the mean with probability at least `1 - 2 eps`.
pub fn halfwidth_known_variance(n: u64, v: f64, epsilon: f64, mode: AlphaMode) -> Result<f64> {
    check_variance(v)?;
    let l = check_epsilon(epsilon)?;
    let nf = n as f64;
    match mode {
        AlphaMode::EpsDependent => {
            if nf <= 2.0 * l {
                return Err(Error::Infeasible {
                    condition: conditions::SAMPLE_SIZE_EPS_DEPENDENT,
                    detail: format!("n = {n}, need n >= {}", (2.0 * l).floor() as u64 + 1),
                });
            }
            Ok((2.0 * v * l / (nf * (1.0 - 2.0 * l / nf))).sqrt())
        }
        AlphaMode::EpsFree => {
            let l1 = 1.0 + l;
            if nf <= 2.0 * l1 {
                return Err(Error::Infeasible {
                    condition: conditions::SAMPLE_SIZE_EPS_FREE,
                    detail: format!("n = {n}, need n >= {}", (2.0 * l1).floor() as u64 + 1),
                });
            }
            Ok(l1 / (0.5 + 0.5 * (1.0 - 2.0 * l1 / nf).sqrt()) * (v / (2.0 * nf)).sqrt())
        }
    }
}

/// Mean estimate under a known variance bound, with its observable
/// halfwidth.
pub fn estimate_mean_known_variance(
    sample: &Sample,
    v: f64,
    epsilon: f64,
    mode: AlphaMode,
    kind: InfluenceKind,
) -> Result<MeanEstimate> {
    let n = sample.len() as u64;
    let alpha = alpha_known_variance(n, v, epsilon, mode)?;
    let halfwidth = halfwidth_known_variance(n, v, epsilon, mode)?;
    let solve = solve_mean(sample, alpha, kind, sample.default_tolerance())?;
    Ok(MeanEstimate {
        theta_hat: solve.theta,
        alpha,
        kind,
        halfwidth: Some(halfwidth),
        iterations: solve.iterations,
        method: match mode {
            AlphaMode::EpsDependent => MeanMethod::KnownVariance,
            AlphaMode::EpsFree => MeanMethod::EpsFree,
        },
    })
}

/// Naive plug-in variant: the unbiased variance estimate replaces the
/// variance in the epsilon-dependent recipe. No observable halfwidth comes
/// with it.
pub fn estimate_mean_plugin(
    sample: &Sample,
    epsilon: f64,
    kind: InfluenceKind,
) -> Result<MeanEstimate> {
    let v_hat = distributions::unbiased_variance(sample)?;
    if v_hat == 0.0 {
        return Err(Error::DegenerateData(
            "the sample variance vanishes; the plug-in scale is undefined".into(),
        ));
    }
    let n = sample.len() as u64;
    let alpha = alpha_known_variance(n, v_hat, epsilon, AlphaMode::EpsDependent)?;
    let solve = solve_mean(sample, alpha, kind, sample.default_tolerance())?;
    Ok(MeanEstimate {
        theta_hat: solve.theta,
        alpha,
        kind,
        halfwidth: None,
        iterations: solve.iterations,
        method: MeanMethod::PlugIn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample_mixture, MixtureComponent, MixtureSpec, RngSeed};
    use proptest::prelude::*;

    fn assert_close(actual: f64, expected: f64, tol: f64) {
        assert!(
            (actual - expected).abs() <= tol,
            "expected {expected}, got {actual}"
        );
    }

    fn sample(values: &[f64]) -> Sample {
        Sample::new(values.to_vec()).unwrap()
    }

    /// Independent reference bisection with the same midpoint-of-zero-set
    /// convention, written without the production solver machinery.
    fn oracle_bisection(s: &Sample, alpha: f64, kind: InfluenceKind) -> f64 {
        let r = |theta: f64| {
            s.values()
                .iter()
                .map(|&y| crate::influence::psi(kind, alpha * (y - theta)).unwrap())
                .sum::<f64>()
                / (alpha * s.len() as f64)
        };
        let (lo, hi) = (s.min(), s.max());
        let mut edges = [lo, hi];
        // edge 0: first theta with r <= 0; edge 1: last theta with r >= 0
        for (slot, keep_left) in [(0usize, false), (1usize, true)] {
            let (mut a, mut b) = (lo, hi);
            if slot == 0 && r(a) <= 0.0 {
                edges[0] = a;
                continue;
            }
            if slot == 1 && r(b) >= 0.0 {
                edges[1] = b;
                continue;
            }
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let val = r(mid);
                let go_right = if keep_left { val >= 0.0 } else { val > 0.0 };
                if go_right {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            edges[slot] = 0.5 * (a + b);
        }
        0.5 * (edges[0] + edges[1])
    }

    #[test]
    fn criterion_reference_values() {
        let s = sample(&[1.0, 1.0, 1.0]);
        assert_eq!(criterion(&s, 0.7, InfluenceKind::Narrow, 1.0).unwrap(), 0.0);
        let pm = sample(&[-1.0, 1.0]);
        assert_eq!(criterion(&pm, 1.0, InfluenceKind::Wide, 0.0).unwrap(), 0.0);
        // mpmath oracle: (2 psi_n(-0.5) + psi_n(1)) / 1.5
        let s3 = sample(&[0.0, 0.0, 3.0]);
        assert_close(
            criterion(&s3, 0.5, InfluenceKind::Narrow, 1.0).unwrap(),
            -0.164573385287683865256427960559,
            1e-15,
        );
        assert!(criterion(&s3, 0.0, InfluenceKind::Narrow, 1.0).is_err());
        assert!(criterion(&s3, -1.0, InfluenceKind::Narrow, 1.0).is_err());
    }

    #[test]
    fn solver_trivial_cases() {
        let c = sample(&[4.2, 4.2, 4.2]);
        let solve = solve_mean(&c, 1.0, InfluenceKind::Narrow, 1e-12).unwrap();
        assert_eq!(solve.theta, 4.2);
        let pm = sample(&[-3.0, 3.0]);
        for kind in [InfluenceKind::Narrow, InfluenceKind::Wide] {
            let got = solve_mean(&pm, 0.3, kind, 1e-12).unwrap();
            assert!(got.theta.abs() <= 1e-10, "kind {kind:?}: {}", got.theta);
        }
    }

    #[test]
    fn solver_matches_oracle_on_skewed_sample() {
        let s = sample(&[0.0, 0.0, 100.0]);
        let tol = 1e-12 * 101.0;
        let solve = solve_mean(&s, 0.1, InfluenceKind::Narrow, tol).unwrap();
        // mpmath root of the closed-form branch equation
        assert_close(solve.theta, 3.56405747094417375264556562582, 1e-9);
        assert_close(solve.theta, oracle_bisection(&s, 0.1, InfluenceKind::Narrow), 1e-9);
    }

    #[test]
    fn flat_zero_set_resolves_to_midpoint() {
        // narrow psi saturates on [-2, 1]: r = 0 on that whole interval
        let s = sample(&[-3.0, 2.0]);
        let got = solve_mean(&s, 1.0, InfluenceKind::Narrow, 1e-10).unwrap();
        assert_close(got.theta, -0.5, 1e-8);
        assert_close(oracle_bisection(&s, 1.0, InfluenceKind::Narrow), -0.5, 1e-8);
    }

    #[test]
    fn alpha_reference_values() {
        assert_close(
            alpha_known_variance(100, 1.0, 0.05, AlphaMode::EpsDependent).unwrap(),
            0.237328634448426038,
            1e-14,
        );
        assert_close(
            alpha_known_variance(100, 1.0, 0.05, AlphaMode::EpsFree).unwrap(),
            0.1414213562373095,
            1e-15,
        );
        let err = alpha_known_variance(4, 1.0, 0.05, AlphaMode::EpsDependent).unwrap_err();
        match err {
            Error::Infeasible { detail, .. } => assert!(detail.contains("need n >= 6"), "{detail}"),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn halfwidth_reference_values() {
        assert_close(
            halfwidth_known_variance(100, 1.0, 0.05, AlphaMode::EpsDependent).unwrap(),
            0.252454347155904994,
            1e-14,
        );
        assert_close(
            halfwidth_known_variance(100, 1.0, 0.05, AlphaMode::EpsFree).unwrap(),
            0.288423215069472620,
            1e-14,
        );
        // n -> infinity limit: sqrt(2 v log(1/eps) / n)
        let big = halfwidth_known_variance(100_000_000, 1.0, 0.05, AlphaMode::EpsDependent).unwrap();
        let limit = (2.0 * (20f64).ln() / 1e8).sqrt();
        assert!((big / limit - 1.0).abs() < 1e-6);
    }

    #[test]
    fn eps_dependent_alpha_eta_consistency() {
        // eta = (alpha v / 2 + L/(alpha n)) / (1/2 + (1/2) sqrt(1 - alpha^2 v - 2L/n))
        for &(n, v, eps) in &[(100u64, 1.0, 0.05), (500, 93.5, 0.01), (2000, 0.25, 0.001)] {
            let alpha = alpha_known_variance(n, v, eps, AlphaMode::EpsDependent).unwrap();
            let eta = halfwidth_known_variance(n, v, eps, AlphaMode::EpsDependent).unwrap();
            let l = (1.0 / eps).ln();
            let nf = n as f64;
            let implied = (alpha * v / 2.0 + l / (alpha * nf))
                / (0.5 + 0.5 * (1.0 - alpha * alpha * v - 2.0 * l / nf).sqrt());
            assert!(
                ((implied - eta) / eta).abs() <= 1e-10,
                "n={n} v={v} eps={eps}: {implied} vs {eta}"
            );
        }
    }

    #[test]
    fn known_variance_estimator_composition() {
        let c = sample(&[2.5; 40]);
        let est = estimate_mean_known_variance(&c, 1.0, 0.05, AlphaMode::EpsDependent, InfluenceKind::Narrow)
            .unwrap();
        assert_eq!(est.theta_hat, 2.5);
        assert_eq!(est.method, MeanMethod::KnownVariance);
        assert!(est.halfwidth.is_some());

        let pm = sample(&[-2.0, 2.0, -2.0, 2.0, -2.0, 2.0, -2.0, 2.0, -2.0, 2.0]);
        let est = estimate_mean_known_variance(&pm, 4.0, 0.05, AlphaMode::EpsFree, InfluenceKind::Wide)
            .unwrap();
        assert!(est.theta_hat.abs() < 1e-9);
        assert_eq!(est.method, MeanMethod::EpsFree);
    }

    #[test]
    fn plugin_estimator_behaviour() {
        let c = sample(&[1.0; 30]);
        assert!(matches!(
            estimate_mean_plugin(&c, 0.05, InfluenceKind::Narrow),
            Err(Error::DegenerateData(_))
        ));
        let alternating: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { -1.0 } else { 1.0 }).collect();
        let est = estimate_mean_plugin(&sample(&alternating), 0.05, InfluenceKind::Narrow).unwrap();
        assert!(est.theta_hat.abs() < 1e-9);
        assert!(est.halfwidth.is_none());
        assert_eq!(est.method, MeanMethod::PlugIn);
    }

    fn arbitrary_sample() -> impl Strategy<Value = Sample> {
        proptest::collection::vec(-100.0f64..100.0, 2..60)
            .prop_map(|v| Sample::new(v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn criterion_brackets_and_is_monotone(s in arbitrary_sample(), alpha in 0.01f64..5.0,
                                              t1 in -120.0f64..120.0, t2 in -120.0f64..120.0) {
            for kind in [InfluenceKind::Narrow, InfluenceKind::Wide] {
                prop_assert!(criterion_raw(&s, alpha, kind, s.min()) >= -1e-12);
                prop_assert!(criterion_raw(&s, alpha, kind, s.max()) <= 1e-12);
                let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
                prop_assert!(
                    criterion_raw(&s, alpha, kind, lo) >= criterion_raw(&s, alpha, kind, hi) - 1e-12
                );
            }
        }

        #[test]
        fn translation_and_scale_equivariance(s in arbitrary_sample(), c in -50.0f64..50.0,
                                              scale in 0.1f64..10.0) {
            // tuned alpha keeps the fixed point in its contracting regime
            let v = crate::distributions::unbiased_variance(&s).unwrap().max(1e-6);
            let alpha = (2.0 / (s.len() as f64 * v)).sqrt();
            let kind = InfluenceKind::Narrow;
            let tol = s.default_tolerance();
            let base = solve_mean(&s, alpha, kind, tol).unwrap().theta;

            let shifted = Sample::new(s.values().iter().map(|&y| y + c).collect()).unwrap();
            let t_shift = solve_mean(&shifted, alpha, kind, shifted.default_tolerance()).unwrap().theta;
            prop_assert!((t_shift - (base + c)).abs() <= 20.0 * shifted.default_tolerance().max(tol),
                "shift: {t_shift} vs {}", base + c);

            let scaled = Sample::new(s.values().iter().map(|&y| y * scale).collect()).unwrap();
            let t_scale = solve_mean(&scaled, alpha / scale, kind, scaled.default_tolerance()).unwrap().theta;
            prop_assert!((t_scale - scale * base).abs() <= 20.0 * scaled.default_tolerance().max(scale * tol),
                "scale: {t_scale} vs {}", scale * base);
        }
    }

    #[test]
    fn fixed_point_agrees_with_oracle_on_mixture_draws() {
        let spec = MixtureSpec::new(vec![
            MixtureComponent { weight: 0.9, mean: 1.0, sd: 1.0 },
            MixtureComponent { weight: 0.1, mean: -3.0, sd: 8.0 },
        ])
        .unwrap();
        for seed in 0..200 {
            let s = sample_mixture(&spec, 80, RngSeed(seed)).unwrap();
            let v = crate::distributions::unbiased_variance(&s).unwrap();
            let alpha = (2.0 / (s.len() as f64 * v)).sqrt();
            let tol = s.default_tolerance();
            for kind in [InfluenceKind::Narrow, InfluenceKind::Wide] {
                let fp = fixed_point_mean(&s, alpha, kind, tol).unwrap();
                let (theta_fp, iters) = fp.expect("fixed point converges on tuned alpha");
                assert!(iters <= 40, "seed {seed}: {iters} iterations");
                let oracle = oracle_bisection(&s, alpha, kind);
                assert!(
                    (theta_fp - oracle).abs() <= 10.0 * tol,
                    "seed {seed} kind {kind:?}: fp {theta_fp} vs oracle {oracle}"
                );
            }
        }
    }
}
