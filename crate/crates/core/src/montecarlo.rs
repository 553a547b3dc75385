//! Seeded, replication-parallel simulation harness: deviation quantile
//! functions of competing estimators and empirical coverage of the interval
//! methods. Every replication derives its own seed from `(seed, index)`, so
//! the output is bitwise identical at any worker count.

use rayon::prelude::*;

use crate::distributions::{
    derive_stream, discrete_moments, empirical_mean, empirical_median, mixture_moments,
    sample_discrete, sample_mixture, DiscreteSpec, MixtureMoments, MixtureSpec, RngSeed,
};
use crate::error::{Error, Result};
use crate::influence::InfluenceKind;
use crate::kurtosis_mean::{estimate_mean_kurtosis, KurtosisOptions};
use crate::lepski::{adaptive_estimate, adaptive_halfwidth, GeometricGrid};
use crate::mean_catoni::{
    alpha_known_variance, estimate_mean_known_variance, estimate_mean_plugin, AlphaMode, Sample,
};
use crate::variance_blocks::{solve_variance, VarianceOptions, XiModeRequest};

/// Generative law driving a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Mixture(MixtureSpec),
    Discrete(DiscreteSpec),
}

impl Source {
    pub fn moments(&self) -> MixtureMoments {
        match self {
            Source::Mixture(spec) => mixture_moments(spec),
            Source::Discrete(spec) => discrete_moments(spec),
        }
    }

    pub fn sample(&self, n: usize, seed: RngSeed) -> Result<Sample> {
        match self {
            Source::Mixture(spec) => sample_mixture(spec, n, seed),
            Source::Discrete(spec) => sample_discrete(spec, n, seed),
        }
    }
}

/// One competing estimator in a deviation-quantile run.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorSpec {
    EmpiricalMean,
    EmpiricalMedian,
    /// Known-variance M-estimator; `None` uses the exact source variance.
    CatoniKnownVariance { v: Option<f64> },
    CatoniPlugIn,
    Lepski { grid: GeometricGrid },
    Kurtosis { kappa_max: f64 },
}

impl EstimatorSpec {
    pub fn label(&self) -> &'static str {
        match self {
            EstimatorSpec::EmpiricalMean => "mean",
            EstimatorSpec::EmpiricalMedian => "median",
            EstimatorSpec::CatoniKnownVariance { .. } => "catoni-known-v",
            EstimatorSpec::CatoniPlugIn => "catoni-plugin",
            EstimatorSpec::Lepski { .. } => "lepski",
            EstimatorSpec::Kurtosis { .. } => "kurtosis",
        }
    }
}

/// A full simulation request.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub source: Source,
    pub n: usize,
    pub reps: usize,
    pub seed: RngSeed,
    pub epsilon: f64,
    pub estimators: Vec<EstimatorSpec>,
}

/// Sorted deviations of one estimator across the replications, read as a
/// quantile function of the probability level.
#[derive(Debug, Clone)]
pub struct QuantileCurve {
    pub estimator: String,
    pub levels: Vec<f64>,
    pub deviations: Vec<f64>,
}

impl QuantileCurve {
    /// Deviation quantile at a probability level in (0, 1].
    pub fn quantile(&self, level: f64) -> f64 {
        let reps = self.deviations.len();
        let idx = ((level * reps as f64).ceil() as usize).clamp(1, reps) - 1;
        self.deviations[idx]
    }
}

/// Empirical coverage of one interval method.
#[derive(Debug, Clone)]
pub struct CoverageReport {
    pub method: String,
    pub hits: usize,
    pub reps: usize,
    pub coverage: f64,
    pub target: f64,
    pub mc_stderr: f64,
}

/// Interval-producing method checked by `coverage`.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverageMethod {
    /// Mean interval at a known variance bound; `None` uses the source variance.
    KnownVariance { v: Option<f64> },
    EpsFree { v: Option<f64> },
    Lepski { grid: GeometricGrid },
    /// Variance log-interval `|log v_hat - log v| <= zeta`; here the
    /// configured epsilon plays the role of the variance-side confidence.
    VarianceBlocks { kappa_max: f64, p: Option<usize>, xi_mode: XiModeRequest },
    KurtosisMean { kappa_max: f64 },
}

impl CoverageMethod {
    pub fn label(&self) -> &'static str {
        match self {
            CoverageMethod::KnownVariance { .. } => "known-v",
            CoverageMethod::EpsFree { .. } => "eps-free",
            CoverageMethod::Lepski { .. } => "lepski",
            CoverageMethod::VarianceBlocks { .. } => "variance",
            CoverageMethod::KurtosisMean { .. } => "kurtosis",
        }
    }
}

impl SimulationConfig {
    fn moments_checked(&self) -> Result<MixtureMoments> {
        let moments = self.source.moments();
        if self.reps < 1 {
            return Err(Error::InvalidParameter("reps must be >= 1".into()));
        }
        if self.n < 1 {
            return Err(Error::InvalidParameter("n must be >= 1".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1/2), got {}",
                self.epsilon
            )));
        }
        Ok(moments)
    }

    /// Check every estimator's preconditions before any replication runs.
    pub fn validate(&self) -> Result<()> {
        let moments = self.moments_checked()?;
        if self.estimators.is_empty() {
            return Err(Error::InvalidParameter("at least one estimator is required".into()));
        }
        for estimator in &self.estimators {
            match estimator {
                EstimatorSpec::EmpiricalMean | EstimatorSpec::EmpiricalMedian => {}
                EstimatorSpec::CatoniKnownVariance { v } => {
                    let v = v.unwrap_or(moments.v);
                    alpha_known_variance(self.n as u64, v, self.epsilon, AlphaMode::EpsDependent)
                        .map(|_| ())?;
                }
                EstimatorSpec::CatoniPlugIn => {
                    if self.n < 2 {
                        return Err(Error::InvalidParameter(
                            "the plug-in estimator needs n >= 2".into(),
                        ));
                    }
                    let l = (1.0 / self.epsilon).ln();
                    if self.n as f64 <= 2.0 * l {
                        return Err(Error::Infeasible {
                            condition: crate::error::conditions::SAMPLE_SIZE_EPS_DEPENDENT,
                            detail: format!("n = {}, need n > {:.2}", self.n, 2.0 * l),
                        });
                    }
                }
                EstimatorSpec::Lepski { grid } => {
                    adaptive_halfwidth(grid.v_ref, grid, self.epsilon, self.n as u64).map(|_| ())?;
                }
                EstimatorSpec::Kurtosis { kappa_max } => {
                    crate::kurtosis_mean::plugin_params(
                        self.n as u64,
                        self.epsilon,
                        *kappa_max,
                        crate::kurtosis_mean::ZetaSource::Auto,
                    )
                    .map(|_| ())?;
                }
            }
        }
        Ok(())
    }

    /// Seed of one replication: the stream of `(seed, rep)`.
    pub fn rep_seed(&self, rep: usize) -> RngSeed {
        RngSeed(derive_stream(self.seed.0, rep as u64))
    }
}

fn run_estimator(
    estimator: &EstimatorSpec,
    sample: &Sample,
    epsilon: f64,
    moments: &MixtureMoments,
) -> Result<f64> {
    match estimator {
        EstimatorSpec::EmpiricalMean => Ok(empirical_mean(sample)),
        EstimatorSpec::EmpiricalMedian => Ok(empirical_median(sample)),
        EstimatorSpec::CatoniKnownVariance { v } => Ok(estimate_mean_known_variance(
            sample,
            v.unwrap_or(moments.v),
            epsilon,
            AlphaMode::EpsDependent,
            InfluenceKind::Narrow,
        )?
        .theta_hat),
        EstimatorSpec::CatoniPlugIn => {
            Ok(estimate_mean_plugin(sample, epsilon, InfluenceKind::Narrow)?.theta_hat)
        }
        EstimatorSpec::Lepski { grid } => {
            Ok(adaptive_estimate(sample, epsilon, grid, InfluenceKind::Narrow)?.theta_tilde)
        }
        EstimatorSpec::Kurtosis { kappa_max } => {
            Ok(estimate_mean_kurtosis(sample, *kappa_max, epsilon, &KurtosisOptions::default())?
                .theta_hat)
        }
    }
}

/// Deviation quantile functions `|estimate - m|` of every configured
/// estimator, the true mean taken from the exact source moments.
/// Deterministic for a given config at any worker count.
pub fn deviation_quantiles(config: &SimulationConfig) -> Result<Vec<QuantileCurve>> {
    config.validate()?;
    let moments = config.source.moments();
    let per_rep: Vec<Vec<f64>> = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let sample = config.source.sample(config.n, config.rep_seed(rep))?;
            config
                .estimators
                .iter()
                .map(|estimator| {
                    run_estimator(estimator, &sample, config.epsilon, &moments)
                        .map(|estimate| (estimate - moments.m).abs())
                        .map_err(|e| {
                            Error::Numerical(format!("replication {rep}: {e}"))
                        })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let levels: Vec<f64> = (1..=config.reps).map(|i| i as f64 / config.reps as f64).collect();
    Ok(config
        .estimators
        .iter()
        .enumerate()
        .map(|(j, estimator)| {
            let mut deviations: Vec<f64> = per_rep.iter().map(|row| row[j]).collect();
            deviations.sort_by(|a, b| a.partial_cmp(b).expect("finite deviations"));
            QuantileCurve {
                estimator: estimator.label().to_string(),
                levels: levels.clone(),
                deviations,
            }
        })
        .collect())
}

fn rep_hit(
    method: &CoverageMethod,
    sample: &Sample,
    epsilon: f64,
    moments: &MixtureMoments,
) -> Result<bool> {
    match method {
        CoverageMethod::KnownVariance { v } => {
            let est = estimate_mean_known_variance(
                sample,
                v.unwrap_or(moments.v),
                epsilon,
                AlphaMode::EpsDependent,
                InfluenceKind::Narrow,
            )?;
            Ok((est.theta_hat - moments.m).abs() <= est.halfwidth.expect("known-v has a width"))
        }
        CoverageMethod::EpsFree { v } => {
            let est = estimate_mean_known_variance(
                sample,
                v.unwrap_or(moments.v),
                epsilon,
                AlphaMode::EpsFree,
                InfluenceKind::Narrow,
            )?;
            Ok((est.theta_hat - moments.m).abs() <= est.halfwidth.expect("eps-free has a width"))
        }
        CoverageMethod::Lepski { grid } => {
            // interval = whole line counts as covering without an estimate
            match adaptive_halfwidth(moments.v, grid, epsilon, sample.len() as u64) {
                Err(Error::Infeasible { .. }) => Ok(true),
                Err(e) => Err(e),
                Ok(halfwidth) => {
                    let res = adaptive_estimate(sample, epsilon, grid, InfluenceKind::Narrow)?;
                    Ok((res.theta_tilde - moments.m).abs() <= halfwidth)
                }
            }
        }
        CoverageMethod::VarianceBlocks { kappa_max, p, xi_mode } => {
            let options = VarianceOptions {
                p: *p,
                xi_mode: *xi_mode,
                kind: InfluenceKind::Narrow,
                tolerance: None,
            };
            let est = solve_variance(sample, *kappa_max, epsilon, &options)?;
            Ok((est.v_hat.ln() - moments.v.ln()).abs() <= est.zeta)
        }
        CoverageMethod::KurtosisMean { kappa_max } => {
            let est =
                estimate_mean_kurtosis(sample, *kappa_max, epsilon, &KurtosisOptions::default())?;
            Ok((est.theta_hat - moments.m).abs() <= est.halfwidth.expect("kurtosis has a width"))
        }
    }
}

/// Empirical coverage of one interval method across the replications.
pub fn coverage(config: &SimulationConfig, method: &CoverageMethod) -> Result<CoverageReport> {
    let moments = config.moments_checked()?;
    let hits: usize = (0..config.reps)
        .into_par_iter()
        .map(|rep| {
            let sample = config.source.sample(config.n, config.rep_seed(rep))?;
            rep_hit(method, &sample, config.epsilon, &moments)
                .map(|hit| hit as usize)
                .map_err(|e| Error::Numerical(format!("replication {rep}: {e}")))
        })
        .sum::<Result<usize>>()?;
    let coverage = hits as f64 / config.reps as f64;
    Ok(CoverageReport {
        method: method.label().to_string(),
        hits,
        reps: config.reps,
        coverage,
        target: 1.0 - 2.0 * config.epsilon,
        mc_stderr: (coverage * (1.0 - coverage) / config.reps as f64).sqrt(),
    })
}
