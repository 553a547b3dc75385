//! Command-line surface: estimation on data files, bound-curve tabulation,
//! moment computation, and simulation runs, all emitting CSV.
//!
//! Exit codes: 0 success, 2 flag/input validation, 3 infeasibility (the
//! message names the violated condition), 4 degenerate data, 5 internal
//! numerical failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::bounds::{bound_curve, BoundKind, BoundQuery};
use crate::distributions::{
    mixture_moments, three_point_spec, four_point_spec, MixtureSpec, RngSeed,
};
use crate::error::{Error, Result};
use crate::influence::InfluenceKind;
use crate::kurtosis_mean::{default_kappa_max, estimate_mean_kurtosis, KurtosisOptions};
use crate::lepski::{adaptive_estimate, adaptive_halfwidth, GeometricGrid};
use crate::mean_catoni::{
    estimate_mean_known_variance, estimate_mean_plugin, AlphaMode, MeanEstimate, Sample,
};
use crate::montecarlo::{
    coverage, deviation_quantiles, CoverageMethod, EstimatorSpec, SimulationConfig, Source,
};
use crate::variance_blocks::{solve_variance, VarianceOptions, XiModeRequest};

#[derive(Debug, Parser)]
#[command(name = "catoni", version, about = "Robust mean and variance estimation for heavy-tailed samples, deviation bound tables, and a seeded Monte Carlo harness", max_term_width = 100)]
pub struct Cli {
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the exact mean, variance and kurtosis of a Gaussian mixture.
    Moments {
        /// Mixture as comma-separated weight:mean:sd triples, e.g.
        /// 0.7:2:1,0.2:-2:1,0.1:0:30 (weights must sum to 1).
        #[arg(long)]
        mixture: String,
    },
    /// Estimate the mean of a data file (one number per line).
    EstimateMean {
        /// Input data file: one decimal number per line, blank lines ignored.
        #[arg(long)]
        input: PathBuf,
        /// Estimator: known-v, eps-free, plugin, lepski or kurtosis.
        #[arg(long)]
        method: String,
        /// Confidence parameter; intervals target probability 1 - 2 epsilon.
        #[arg(long)]
        epsilon: f64,
        /// Variance bound used by known-v and eps-free.
        #[arg(long)]
        variance: Option<f64>,
        /// Kurtosis upper bound used by the kurtosis method
        /// (default 6n/1000 once n >= 1000).
        #[arg(long = "kappa-max")]
        kappa_max: Option<f64>,
        /// Variance grid for the lepski method as V:rho:s.
        #[arg(long)]
        grid: Option<String>,
        /// Influence function: narrow (default) or wide.
        #[arg(long)]
        psi: Option<String>,
    },
    /// Estimate the variance of a data file with the block scheme.
    EstimateVariance {
        /// Input data file: one decimal number per line, blank lines ignored.
        #[arg(long)]
        input: PathBuf,
        /// Kurtosis upper bound calibrating the blocks.
        #[arg(long = "kappa-max")]
        kappa_max: f64,
        /// Variance-side confidence parameter (coverage 1 - 2 epsilon1).
        #[arg(long)]
        epsilon1: f64,
        /// Block size override (default: approximately optimal).
        #[arg(long)]
        p: Option<usize>,
        /// Root-offset mode: tight or simple (default: tight with fallback).
        #[arg(long)]
        xi: Option<String>,
    },
    /// Tabulate every applicable deviation bound over an epsilon grid.
    Bounds {
        /// Sample size.
        #[arg(long)]
        n: u64,
        /// Variance.
        #[arg(long)]
        v: f64,
        /// Kurtosis bound; unlocks the kurtosis-aware bounds.
        #[arg(long)]
        kappa: Option<f64>,
        /// Logarithmic epsilon grid as start:stop:count, e.g. 0.1:1e-14:200.
        #[arg(long = "eps-grid")]
        eps_grid: String,
        /// Variance grid as V:rho:s; adds the adaptive bound curve.
        #[arg(long)]
        grid: Option<String>,
    },
    /// Run seeded replications and emit deviation quantiles or coverage.
    Simulate {
        /// Source law: a mixture (weight:mean:sd,...), worst3:v,eta or
        /// worst4:v,kappa,q.
        #[arg(long)]
        source: String,
        /// Sample size per replication.
        #[arg(long)]
        n: usize,
        /// Number of replications.
        #[arg(long)]
        reps: usize,
        /// Base seed; replication i derives its own stream from it.
        #[arg(long)]
        seed: u64,
        /// Confidence parameter shared by the configured estimators.
        #[arg(long)]
        epsilon: f64,
        /// Comma-separated estimators: mean, median, known-v[:v], plugin,
        /// lepski:V:rho:s, kurtosis:kappa_max.
        #[arg(long)]
        estimators: String,
        /// Instead of quantiles, report coverage of one interval method:
        /// known-v[:v], eps-free[:v], lepski:V:rho:s,
        /// variance:kappa_max[:p][:tight|simple], kurtosis:kappa_max.
        #[arg(long)]
        coverage: Option<String>,
    },
}

/// Shortest decimal that re-parses to the identical f64; infinities print
/// as `inf`.
pub fn format_float(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

fn parse_f64(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse {what} from {text:?}")))
}

pub fn parse_grid(text: &str) -> Result<GeometricGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!("grid {text:?} is not V:rho:s")));
    }
    let s = parts[2]
        .trim()
        .parse::<u32>()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse grid half-count from {:?}", parts[2])))?;
    GeometricGrid::new(parse_f64(parts[0], "grid reference variance")?, parse_f64(parts[1], "grid ratio")?, s)
}

fn parse_psi(text: Option<&str>) -> Result<InfluenceKind> {
    match text {
        None => Ok(InfluenceKind::Narrow),
        Some(s) => s.parse(),
    }
}

fn read_sample(path: &Path) -> Result<Sample> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        values.push(trimmed.parse::<f64>().map_err(|_| {
            Error::InvalidParameter(format!(
                "{}:{}: cannot parse {trimmed:?} as a number",
                path.display(),
                lineno + 1
            ))
        })?);
    }
    Sample::new(values)
}

/// Logarithmically spaced epsilon grid from start:stop:count, returned in
/// increasing order.
fn parse_eps_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidParameter(format!(
            "epsilon grid {text:?} is not start:stop:count"
        )));
    }
    let start = parse_f64(parts[0], "grid start")?;
    let stop = parse_f64(parts[1], "grid stop")?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("cannot parse grid count from {:?}", parts[2])))?;
    if count == 0 {
        return Err(Error::InvalidParameter("epsilon grid count must be >= 1".into()));
    }
    for &e in &[start, stop] {
        if !(e > 0.0 && e < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "epsilon grid endpoints must lie in (0, 1/2), got {e}"
            )));
        }
    }
    let mut grid: Vec<f64> = if count == 1 {
        vec![start]
    } else {
        let (ln_a, ln_b) = (start.ln(), stop.ln());
        (0..count)
            .map(|i| (ln_a + (ln_b - ln_a) * i as f64 / (count - 1) as f64).exp())
            .collect()
    };
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();
    Ok(grid)
}

pub fn parse_source(text: &str, n: usize) -> Result<Source> {
    if let Some(rest) = text.strip_prefix("worst3:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::InvalidParameter(format!("worst3 source {rest:?} is not v,eta")));
        }
        let spec = three_point_spec(
            parse_f64(parts[0], "worst3 variance")?,
            parse_f64(parts[1], "worst3 eta")?,
            n as u64,
        )?;
        Ok(Source::Discrete(spec))
    } else if let Some(rest) = text.strip_prefix("worst4:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "worst4 source {rest:?} is not v,kappa,q"
            )));
        }
        let spec = four_point_spec(
            parse_f64(parts[0], "worst4 variance")?,
            parse_f64(parts[1], "worst4 kappa")?,
            parse_f64(parts[2], "worst4 q")?,
            n as u64,
        )?;
        Ok(Source::Discrete(spec))
    } else {
        Ok(Source::Mixture(MixtureSpec::parse(text)?))
    }
}

pub fn parse_estimators(text: &str) -> Result<Vec<EstimatorSpec>> {
    let mut estimators = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        let (name, rest) = match item.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (item, None),
        };
        let spec = match (name, rest) {
            ("mean", None) => EstimatorSpec::EmpiricalMean,
            ("median", None) => EstimatorSpec::EmpiricalMedian,
            ("known-v", None) => EstimatorSpec::CatoniKnownVariance { v: None },
            ("known-v", Some(v)) => {
                EstimatorSpec::CatoniKnownVariance { v: Some(parse_f64(v, "known-v variance")?) }
            }
            ("plugin", None) => EstimatorSpec::CatoniPlugIn,
            ("lepski", Some(grid)) => EstimatorSpec::Lepski { grid: parse_grid(grid)? },
            ("kurtosis", Some(k)) => {
                EstimatorSpec::Kurtosis { kappa_max: parse_f64(k, "kurtosis bound")? }
            }
            _ => {
                return Err(Error::InvalidParameter(format!("unknown estimator {item:?}")));
            }
        };
        estimators.push(spec);
    }
    if estimators.is_empty() {
        return Err(Error::InvalidParameter("at least one estimator is required".into()));
    }
    Ok(estimators)
}

pub fn parse_coverage_method(text: &str) -> Result<CoverageMethod> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, Some(r)),
        None => (text, None),
    };
    match (name, rest) {
        ("known-v", None) => Ok(CoverageMethod::KnownVariance { v: None }),
        ("known-v", Some(v)) => {
            Ok(CoverageMethod::KnownVariance { v: Some(parse_f64(v, "known-v variance")?) })
        }
        ("eps-free", None) => Ok(CoverageMethod::EpsFree { v: None }),
        ("eps-free", Some(v)) => {
            Ok(CoverageMethod::EpsFree { v: Some(parse_f64(v, "eps-free variance")?) })
        }
        ("lepski", Some(grid)) => Ok(CoverageMethod::Lepski { grid: parse_grid(grid)? }),
        ("variance", Some(rest)) => {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.is_empty() || parts.len() > 3 {
                return Err(Error::InvalidParameter(format!(
                    "variance method {rest:?} is not kappa_max[:p][:tight|simple]"
                )));
            }
            let kappa_max = parse_f64(parts[0], "variance kurtosis bound")?;
            let p = match parts.get(1) {
                Some(p) => Some(p.trim().parse::<usize>().map_err(|_| {
                    Error::InvalidParameter(format!("cannot parse block size from {p:?}"))
                })?),
                None => None,
            };
            let xi_mode = parse_xi_mode(parts.get(2).copied())?;
            Ok(CoverageMethod::VarianceBlocks { kappa_max, p, xi_mode })
        }
        ("kurtosis", Some(k)) => {
            Ok(CoverageMethod::KurtosisMean { kappa_max: parse_f64(k, "kurtosis bound")? })
        }
        _ => Err(Error::InvalidParameter(format!("unknown coverage method {text:?}"))),
    }
}

fn parse_xi_mode(text: Option<&str>) -> Result<XiModeRequest> {
    match text {
        None => Ok(XiModeRequest::Auto),
        Some("tight") => Ok(XiModeRequest::Tight),
        Some("simple") => Ok(XiModeRequest::Simple),
        Some(other) => Err(Error::InvalidParameter(format!(
            "unknown xi mode {other:?} (expected \"tight\" or \"simple\")"
        ))),
    }
}

fn mean_estimate_csv(est: &MeanEstimate) -> String {
    let halfwidth = est.halfwidth.map(format_float).unwrap_or_default();
    format!("estimate,halfwidth\n{},{halfwidth}\n", format_float(est.theta_hat))
}

/// Execute one invocation and return its CSV output.
pub fn execute(command: &Command) -> Result<String> {
    match command {
        Command::Moments { mixture } => {
            let spec = MixtureSpec::parse(mixture)?;
            let m = mixture_moments(&spec);
            let kappa = m.kappa.map(format_float).unwrap_or_default();
            Ok(format!(
                "m,v,kappa\n{},{},{kappa}\n",
                format_float(m.m),
                format_float(m.v)
            ))
        }
        Command::EstimateMean { input, method, epsilon, variance, kappa_max, grid, psi } => {
            let sample = read_sample(input)?;
            let kind = parse_psi(psi.as_deref())?;
            let need_variance = || {
                variance.ok_or_else(|| {
                    Error::InvalidParameter(format!("--variance is required for method {method}"))
                })
            };
            let est = match method.as_str() {
                "known-v" => estimate_mean_known_variance(
                    &sample,
                    need_variance()?,
                    *epsilon,
                    AlphaMode::EpsDependent,
                    kind,
                )?,
                "eps-free" => estimate_mean_known_variance(
                    &sample,
                    need_variance()?,
                    *epsilon,
                    AlphaMode::EpsFree,
                    kind,
                )?,
                "plugin" => estimate_mean_plugin(&sample, *epsilon, kind)?,
                "lepski" => {
                    let grid_text = grid.as_deref().ok_or_else(|| {
                        Error::InvalidParameter("--grid V:rho:s is required for method lepski".into())
                    })?;
                    let grid = parse_grid(grid_text)?;
                    let res = adaptive_estimate(&sample, *epsilon, &grid, kind)?;
                    // the adaptive bound is unobservable; report the width at
                    // the reference variance when it is covered
                    let halfwidth =
                        adaptive_halfwidth(grid.v_ref, &grid, *epsilon, sample.len() as u64).ok();
                    return Ok(format!(
                        "estimate,halfwidth\n{},{}\n",
                        format_float(res.theta_tilde),
                        halfwidth.map(format_float).unwrap_or_default()
                    ));
                }
                "kurtosis" => {
                    let kappa = match kappa_max {
                        Some(k) => *k,
                        None => default_kappa_max(sample.len()).ok_or_else(|| {
                            Error::InvalidParameter(
                                "--kappa-max is required for the kurtosis method when n < 1000"
                                    .into(),
                            )
                        })?,
                    };
                    estimate_mean_kurtosis(&sample, kappa, *epsilon, &KurtosisOptions::default())?
                }
                other => {
                    return Err(Error::InvalidParameter(format!("unknown method {other:?}")));
                }
            };
            Ok(mean_estimate_csv(&est))
        }
        Command::EstimateVariance { input, kappa_max, epsilon1, p, xi } => {
            if !(*epsilon1 > 0.0 && *epsilon1 < 0.5) {
                return Err(Error::InvalidParameter(format!(
                    "epsilon1 must lie in (0, 1/2), got {epsilon1}"
                )));
            }
            let sample = read_sample(input)?;
            let options = VarianceOptions {
                p: *p,
                xi_mode: parse_xi_mode(xi.as_deref())?,
                kind: InfluenceKind::Narrow,
                tolerance: None,
            };
            let est = solve_variance(&sample, *kappa_max, *epsilon1, &options)?;
            Ok(format!(
                "v_hat,zeta\n{},{}\n",
                format_float(est.v_hat),
                format_float(est.zeta)
            ))
        }
        Command::Bounds { n, v, kappa, eps_grid, grid } => {
            let eps = parse_eps_grid(eps_grid)?;
            let template = BoundQuery::new(*n, *v, *kappa, eps[0])?;
            let mut kinds = vec![
                BoundKind::Chebyshev,
                BoundKind::Gaussian,
                BoundKind::Catoni,
                BoundKind::CatoniEpsFree,
                BoundKind::LowerPlain,
            ];
            if kappa.is_some() {
                kinds.extend([
                    BoundKind::KurtosisUpper,
                    BoundKind::FourthMoment,
                    BoundKind::EmpiricalBest,
                    BoundKind::LowerKurtosis,
                    BoundKind::KurtosisMean,
                    BoundKind::VarianceZeta,
                ]);
            }
            if let Some(grid_text) = grid {
                kinds.push(BoundKind::Adaptive(parse_grid(grid_text)?));
            }
            let mut out = String::from("epsilon,bound,halfwidth\n");
            for kind in &kinds {
                let curve = bound_curve(&template, kind, &eps)?;
                for (epsilon, halfwidth) in curve.points {
                    writeln!(
                        out,
                        "{},{},{}",
                        format_float(epsilon),
                        curve.bound_name,
                        format_float(halfwidth)
                    )
                    .expect("string write");
                }
            }
            Ok(out)
        }
        Command::Simulate { source, n, reps, seed, epsilon, estimators, coverage: coverage_method } => {
            let config = SimulationConfig {
                source: parse_source(source, *n)?,
                n: *n,
                reps: *reps,
                seed: RngSeed(*seed),
                epsilon: *epsilon,
                estimators: parse_estimators(estimators)?,
            };
            let pool = thread_pool_from_env()?;
            let run = || -> Result<String> {
                match coverage_method {
                    Some(method_text) => {
                        let method = parse_coverage_method(method_text)?;
                        let report = coverage(&config, &method)?;
                        Ok(format!(
                            "method,reps,hits,coverage,target\n{},{},{},{},{}\n",
                            report.method,
                            report.reps,
                            report.hits,
                            format_float(report.coverage),
                            format_float(report.target)
                        ))
                    }
                    None => {
                        let curves = deviation_quantiles(&config)?;
                        let mut out = String::from("estimator,level,deviation\n");
                        for curve in curves {
                            for (level, deviation) in curve.levels.iter().zip(&curve.deviations) {
                                writeln!(
                                    out,
                                    "{},{},{}",
                                    curve.estimator,
                                    format_float(*level),
                                    format_float(*deviation)
                                )
                                .expect("string write");
                            }
                        }
                        Ok(out)
                    }
                }
            };
            match pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        }
    }
}

/// Simulation thread pool from CATONI_THREADS (0 or unset: library default).
fn thread_pool_from_env() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var("CATONI_THREADS") {
        Err(_) => Ok(None),
        Ok(text) => {
            let count: usize = text.trim().parse().map_err(|_| {
                Error::InvalidParameter(format!("CATONI_THREADS must be an integer, got {text:?}"))
            })?;
            if count == 0 {
                Ok(None)
            } else {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(count)
                    .build()
                    .map(Some)
                    .map_err(|e| Error::Numerical(format!("cannot build thread pool: {e}")))
            }
        }
    }
}

/// Run an invocation, writing CSV to the requested destination; returns the
/// process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(&cli.command) {
        Ok(text) => match &cli.output {
            None => {
                print!("{text}");
                0
            }
            Some(path) => match std::fs::write(path, &text) {
                Ok(()) => 0,
                Err(e) => {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    2
                }
            },
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn moments_matches_documented_row() {
        let out = execute(&Command::Moments { mixture: "0.7:2:1,0.2:-2:1,0.1:0:30".into() }).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("m,v,kappa"));
        let fields: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|f| f.parse().unwrap())
            .collect();
        assert!((fields[0] - 1.0).abs() <= 5e-10, "m = {}", fields[0]);
        assert!((fields[1] - 93.5).abs() <= 5e-8, "v = {}", fields[1]);
        assert!((fields[2] - 27.86).abs() <= 5e-3, "kappa = {}", fields[2]);
    }

    #[test]
    fn eps_grid_parsing() {
        let grid = parse_eps_grid("0.1:1e-14:200").unwrap();
        assert_eq!(grid.len(), 200);
        assert!(grid.windows(2).all(|w| w[0] < w[1]));
        assert!((grid[0] - 1e-14).abs() < 1e-20);
        assert!((grid[199] - 0.1).abs() < 1e-12);
        assert!(parse_eps_grid("0.6:1e-3:5").is_err());
        assert!(parse_eps_grid("0.1:1e-3").is_err());
        assert_eq!(parse_eps_grid("0.05:0.2:1").unwrap(), vec![0.05]);
    }

    #[test]
    fn estimator_list_parsing() {
        let list = parse_estimators("mean,median,known-v:93.5,plugin,lepski:1:1.05:5,kurtosis:12").unwrap();
        assert_eq!(list.len(), 6);
        assert_eq!(list[2], EstimatorSpec::CatoniKnownVariance { v: Some(93.5) });
        assert!(matches!(&list[4], EstimatorSpec::Lepski { grid } if grid.s == 5));
        assert!(parse_estimators("nope").is_err());
        assert!(parse_estimators("").is_err());
    }

    #[test]
    fn coverage_method_parsing() {
        assert_eq!(parse_coverage_method("known-v").unwrap(), CoverageMethod::KnownVariance { v: None });
        assert!(matches!(
            parse_coverage_method("variance:12:2:tight").unwrap(),
            CoverageMethod::VarianceBlocks { kappa_max, p: Some(2), xi_mode: XiModeRequest::Tight }
                if kappa_max == 12.0
        ));
        assert!(parse_coverage_method("variance").is_err());
        assert!(parse_coverage_method("lepski").is_err());
    }

    #[test]
    fn infinities_serialize_as_inf() {
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(1.0 / 3.0), "0.3333333333333333");
    }

    proptest! {
        #[test]
        fn formatted_floats_reparse_identically(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(!x.is_nan());
            let parsed: f64 = format_float(x).replace("inf", "infinity").parse().unwrap();
            prop_assert_eq!(parsed.to_bits(), x.to_bits());
        }
    }
}
