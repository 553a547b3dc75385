//! Python bindings: the estimators, bounds, samplers and the simulation
//! harness, with errors mapped onto ValueError/RuntimeError.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use catoni::bounds::{self, BoundQuery};
use catoni::cli::{parse_coverage_method, parse_estimators, parse_source};
use catoni::distributions::{
    self, discrete_moments, mixture_moments, DiscreteSpec, MixtureComponent, MixtureSpec, RngSeed,
};
use catoni::influence::InfluenceKind;
use catoni::kurtosis_mean::{self, KurtosisOptions};
use catoni::lepski::GeometricGrid;
use catoni::mean_catoni::{self, AlphaMode, Sample};
use catoni::montecarlo::{self, SimulationConfig};
use catoni::variance_blocks::{self, VarianceOptions, XiModeRequest};
use catoni::Error;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn sample_from(data: Vec<f64>) -> PyResult<Sample> {
    Sample::new(data).map_err(to_py_err)
}

fn kind_from(kind: &str) -> PyResult<InfluenceKind> {
    kind.parse().map_err(to_py_err)
}

fn mixture_from(components: Vec<(f64, f64, f64)>) -> PyResult<MixtureSpec> {
    MixtureSpec::new(
        components
            .into_iter()
            .map(|(weight, mean, sd)| MixtureComponent { weight, mean, sd })
            .collect(),
    )
    .map_err(to_py_err)
}

/// Point estimate of the mean with its tuning and observable interval.
#[pyclass(name = "MeanEstimate")]
struct PyMeanEstimate {
    #[pyo3(get)]
    theta_hat: f64,
    #[pyo3(get)]
    alpha: f64,
    #[pyo3(get)]
    halfwidth: Option<f64>,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    method: String,
}

impl From<mean_catoni::MeanEstimate> for PyMeanEstimate {
    fn from(est: mean_catoni::MeanEstimate) -> Self {
        PyMeanEstimate {
            theta_hat: est.theta_hat,
            alpha: est.alpha,
            halfwidth: est.halfwidth,
            iterations: est.iterations,
            method: est.method.as_str().to_string(),
        }
    }
}

/// Variance estimate with its log-accuracy bound.
#[pyclass(name = "VarianceEstimate")]
struct PyVarianceEstimate {
    #[pyo3(get)]
    v_hat: f64,
    #[pyo3(get)]
    beta_hat: f64,
    #[pyo3(get)]
    zeta: f64,
    #[pyo3(get)]
    iterations: usize,
    #[pyo3(get)]
    block_size: usize,
}

/// Adaptive estimate with its final interval.
#[pyclass(name = "AdaptiveEstimate")]
struct PyAdaptiveEstimate {
    #[pyo3(get)]
    theta_tilde: f64,
    #[pyo3(get)]
    lo: f64,
    #[pyo3(get)]
    hi: f64,
}

#[pyfunction]
fn psi(kind: &str, x: f64) -> PyResult<f64> {
    catoni::influence::psi(kind_from(kind)?, x).map_err(to_py_err)
}

#[pyfunction]
fn chi(x: f64) -> PyResult<f64> {
    catoni::influence::chi(x).map_err(to_py_err)
}

#[pyfunction]
fn g(x: f64) -> PyResult<f64> {
    catoni::influence::g(x).map_err(to_py_err)
}

#[pyfunction]
fn chi_constants(py: Python<'_>) -> PyResult<Py<PyDict>> {
    let c = catoni::influence::chi_constants();
    let dict = PyDict::new(py);
    dict.set_item("x1", c.x1)?;
    dict.set_item("y1", c.y1)?;
    dict.set_item("p1", c.p1)?;
    dict.set_item("chi_sup", c.chi_sup)?;
    dict.set_item("a", c.a)?;
    Ok(dict.into())
}

/// Exact (m, v, kappa) of a Gaussian mixture given as (weight, mean, sd)
/// triples; kappa is None for a degenerate mixture.
#[pyfunction]
fn moments(components: Vec<(f64, f64, f64)>) -> PyResult<(f64, f64, Option<f64>)> {
    let m = mixture_moments(&mixture_from(components)?);
    Ok((m.m, m.v, m.kappa))
}

#[pyfunction]
fn sample_mixture(components: Vec<(f64, f64, f64)>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let spec = mixture_from(components)?;
    Ok(distributions::sample_mixture(&spec, n, RngSeed(seed))
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

#[pyfunction]
fn sample_discrete(atoms: Vec<(f64, f64)>, n: usize, seed: u64) -> PyResult<Vec<f64>> {
    let spec = DiscreteSpec::new(atoms).map_err(to_py_err)?;
    Ok(distributions::sample_discrete(&spec, n, RngSeed(seed))
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

/// Worst-case three-point law as (value, probability) atoms.
#[pyfunction]
fn three_point_spec(v: f64, eta: f64, n: u64) -> PyResult<Vec<(f64, f64)>> {
    let spec = distributions::three_point_spec(v, eta, n).map_err(to_py_err)?;
    Ok(spec.atoms().to_vec())
}

/// Worst-case four-point law as (value, probability) atoms.
#[pyfunction]
fn four_point_spec(v: f64, kappa: f64, q: f64, n: u64) -> PyResult<Vec<(f64, f64)>> {
    let spec = distributions::four_point_spec(v, kappa, q, n).map_err(to_py_err)?;
    Ok(spec.atoms().to_vec())
}

#[pyfunction]
fn discrete_spec_moments(atoms: Vec<(f64, f64)>) -> PyResult<(f64, f64, Option<f64>)> {
    let spec = DiscreteSpec::new(atoms).map_err(to_py_err)?;
    let m = discrete_moments(&spec);
    Ok((m.m, m.v, m.kappa))
}

#[pyfunction]
#[pyo3(signature = (data, v, epsilon, mode = "eps-dependent", kind = "narrow"))]
fn estimate_mean_known_variance(
    data: Vec<f64>,
    v: f64,
    epsilon: f64,
    mode: &str,
    kind: &str,
) -> PyResult<PyMeanEstimate> {
    let mode = match mode {
        "eps-dependent" => AlphaMode::EpsDependent,
        "eps-free" => AlphaMode::EpsFree,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown mode {other:?} (expected \"eps-dependent\" or \"eps-free\")"
            )))
        }
    };
    mean_catoni::estimate_mean_known_variance(&sample_from(data)?, v, epsilon, mode, kind_from(kind)?)
        .map(Into::into)
        .map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (data, epsilon, kind = "narrow"))]
fn estimate_mean_plugin(data: Vec<f64>, epsilon: f64, kind: &str) -> PyResult<PyMeanEstimate> {
    mean_catoni::estimate_mean_plugin(&sample_from(data)?, epsilon, kind_from(kind)?)
        .map(Into::into)
        .map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (data, epsilon, v_ref, rho, s, kind = "narrow"))]
fn estimate_mean_lepski(
    data: Vec<f64>,
    epsilon: f64,
    v_ref: f64,
    rho: f64,
    s: u32,
    kind: &str,
) -> PyResult<PyAdaptiveEstimate> {
    let grid = GeometricGrid::new(v_ref, rho, s).map_err(to_py_err)?;
    let res = catoni::lepski::adaptive_estimate(&sample_from(data)?, epsilon, &grid, kind_from(kind)?)
        .map_err(to_py_err)?;
    Ok(PyAdaptiveEstimate {
        theta_tilde: res.theta_tilde,
        lo: res.final_interval.0,
        hi: res.final_interval.1,
    })
}

#[pyfunction]
#[pyo3(signature = (data, kappa_max, epsilon))]
fn estimate_mean_kurtosis(data: Vec<f64>, kappa_max: f64, epsilon: f64) -> PyResult<PyMeanEstimate> {
    kurtosis_mean::estimate_mean_kurtosis(
        &sample_from(data)?,
        kappa_max,
        epsilon,
        &KurtosisOptions::default(),
    )
    .map(Into::into)
    .map_err(to_py_err)
}

#[pyfunction]
#[pyo3(signature = (data, kappa_max, epsilon1, p = None, xi = None))]
fn estimate_variance(
    data: Vec<f64>,
    kappa_max: f64,
    epsilon1: f64,
    p: Option<usize>,
    xi: Option<&str>,
) -> PyResult<PyVarianceEstimate> {
    let xi_mode = match xi {
        None => XiModeRequest::Auto,
        Some("tight") => XiModeRequest::Tight,
        Some("simple") => XiModeRequest::Simple,
        Some(other) => {
            return Err(PyValueError::new_err(format!(
                "unknown xi mode {other:?} (expected \"tight\" or \"simple\")"
            )))
        }
    };
    let options = VarianceOptions { p, xi_mode, kind: InfluenceKind::Narrow, tolerance: None };
    let est = variance_blocks::solve_variance(&sample_from(data)?, kappa_max, epsilon1, &options)
        .map_err(to_py_err)?;
    Ok(PyVarianceEstimate {
        v_hat: est.v_hat,
        beta_hat: est.beta_hat,
        zeta: est.zeta,
        iterations: est.iterations,
        block_size: est.params.p,
    })
}

/// One deviation bound by name: chebyshev, gaussian, catoni,
/// catoni-eps-free, kurtosis-upper, fourth-moment, empirical-best,
/// lower-plain, lower-kurtosis, kurtosis-mean or variance-zeta.
#[pyfunction]
#[pyo3(signature = (name, n, v, epsilon, kappa = None))]
fn bound_halfwidth(name: &str, n: u64, v: f64, epsilon: f64, kappa: Option<f64>) -> PyResult<f64> {
    let kind: bounds::BoundKind = name.parse().map_err(to_py_err)?;
    let query = BoundQuery::new(n, v, kappa, epsilon).map_err(to_py_err)?;
    let curve = bounds::bound_curve(&query, &kind, &[epsilon]).map_err(to_py_err)?;
    Ok(curve.points[0].1)
}

#[pyfunction]
fn std_normal_quantile(p: f64) -> PyResult<f64> {
    bounds::std_normal_quantile(p).map_err(to_py_err)
}

#[pyfunction]
fn chi_square_quantile(p: f64, dof: u64) -> PyResult<f64> {
    bounds::chi_square_quantile(p, dof).map_err(to_py_err)
}

fn config_from(
    source: &str,
    n: usize,
    reps: usize,
    seed: u64,
    epsilon: f64,
    estimators: &str,
) -> PyResult<SimulationConfig> {
    Ok(SimulationConfig {
        source: parse_source(source, n).map_err(to_py_err)?,
        n,
        reps,
        seed: RngSeed(seed),
        epsilon,
        estimators: parse_estimators(estimators).map_err(to_py_err)?,
    })
}

/// Sorted |estimate - m| per estimator label, from seeded replications.
/// Sources and estimator lists use the CLI text forms.
#[pyfunction]
fn deviation_quantiles(
    py: Python<'_>,
    source: &str,
    n: usize,
    reps: usize,
    seed: u64,
    epsilon: f64,
    estimators: &str,
) -> PyResult<Py<PyDict>> {
    let config = config_from(source, n, reps, seed, epsilon, estimators)?;
    let curves = montecarlo::deviation_quantiles(&config).map_err(to_py_err)?;
    let dict = PyDict::new(py);
    for curve in curves {
        dict.set_item(curve.estimator, curve.deviations)?;
    }
    Ok(dict.into())
}

/// Empirical coverage (hits, reps, coverage, target) of one interval method.
#[pyfunction]
fn coverage(
    source: &str,
    n: usize,
    reps: usize,
    seed: u64,
    epsilon: f64,
    method: &str,
) -> PyResult<(usize, usize, f64, f64)> {
    let config = config_from(source, n, reps, seed, epsilon, "mean")?;
    let method = parse_coverage_method(method).map_err(to_py_err)?;
    let report = montecarlo::coverage(&config, &method).map_err(to_py_err)?;
    Ok((report.hits, report.reps, report.coverage, report.target))
}

#[pymodule]
fn catoni_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMeanEstimate>()?;
    m.add_class::<PyVarianceEstimate>()?;
    m.add_class::<PyAdaptiveEstimate>()?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(chi, m)?)?;
    m.add_function(wrap_pyfunction!(g, m)?)?;
    m.add_function(wrap_pyfunction!(chi_constants, m)?)?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(sample_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(sample_discrete, m)?)?;
    m.add_function(wrap_pyfunction!(three_point_spec, m)?)?;
    m.add_function(wrap_pyfunction!(four_point_spec, m)?)?;
    m.add_function(wrap_pyfunction!(discrete_spec_moments, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean_known_variance, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean_plugin, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean_lepski, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_mean_kurtosis, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_variance, m)?)?;
    m.add_function(wrap_pyfunction!(bound_halfwidth, m)?)?;
    m.add_function(wrap_pyfunction!(std_normal_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(chi_square_quantile, m)?)?;
    m.add_function(wrap_pyfunction!(deviation_quantiles, m)?)?;
    m.add_function(wrap_pyfunction!(coverage, m)?)?;
    Ok(())
}
