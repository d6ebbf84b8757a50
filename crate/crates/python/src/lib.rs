//! Python bindings for the cachecalc library.
//!
//! Build with `cargo build --release -p cachecalc-py`; the resulting
//! `libcachecalc_py.so` imports as the module `cachecalc_py` once renamed
//! (see python/smoke_test.py).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cachecalc::bounds::{self, IntensityVector};
use cachecalc::combinatorics::{self, ProfileVector};
use cachecalc::exact::{self, NetworkConfig};
use cachecalc::simulation::{self, AssociationPolicy, PolicyKind, ScalingRegime};

fn value_err(e: cachecalc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "NetworkConfig", frozen)]
struct PyNetworkConfig {
    inner: NetworkConfig,
}

#[pymethods]
impl PyNetworkConfig {
    #[new]
    fn new(users: u32, caches: u32, t: u32) -> PyResult<Self> {
        Ok(PyNetworkConfig {
            inner: NetworkConfig::new(users, caches, t).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn from_gamma(users: u32, caches: u32, gamma: f64) -> PyResult<Self> {
        Ok(PyNetworkConfig {
            inner: NetworkConfig::from_gamma(users, caches, gamma).map_err(value_err)?,
        })
    }

    #[getter]
    fn users(&self) -> u32 {
        self.inner.users()
    }

    #[getter]
    fn caches(&self) -> u32 {
        self.inner.caches()
    }

    #[getter]
    fn t(&self) -> u32 {
        self.inner.redundancy()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    fn worst_case_delay(&self) -> f64 {
        self.inner.worst_case_delay()
    }

    fn balanced_profile(&self) -> Vec<u32> {
        self.inner.balanced_profile().loads().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "NetworkConfig(users={}, caches={}, t={})",
            self.inner.users(),
            self.inner.caches(),
            self.inner.redundancy()
        )
    }
}

#[pyclass(name = "ThresholdBounds", frozen)]
struct PyThresholdBounds {
    #[pyo3(get)]
    lower: f64,
    #[pyo3(get)]
    upper: f64,
    #[pyo3(get)]
    coverage: f64,
    #[pyo3(get)]
    requested: f64,
    #[pyo3(get)]
    truncated: bool,
}

#[pyclass(name = "SimulationReport", frozen)]
struct PySimulationReport {
    #[pyo3(get)]
    samples: u64,
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    std_dev: f64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    ci95: (f64, f64),
    #[pyo3(get)]
    seed: u64,
    #[pyo3(get)]
    policy: String,
    #[pyo3(get)]
    rank_means: Vec<f64>,
}

impl From<simulation::SimulationReport> for PySimulationReport {
    fn from(r: simulation::SimulationReport) -> Self {
        PySimulationReport {
            samples: r.samples,
            mean: r.mean,
            std_dev: r.std_dev,
            std_error: r.std_error,
            ci95: r.ci95,
            seed: r.seed,
            policy: r.policy,
            rank_means: r.rank_means,
        }
    }
}

fn build_policy(
    caches: u32,
    policy: &str,
    h: u32,
    alpha: Option<f64>,
) -> PyResult<AssociationPolicy> {
    let intensities = match alpha {
        Some(a) => bounds::zipf_intensities(caches, a).map_err(value_err)?,
        None => IntensityVector::uniform(caches),
    };
    let kind = match policy {
        "uniform" => PolicyKind::Uniform,
        "hchoice" => PolicyKind::HChoice(h),
        "proximity" => PolicyKind::Proximity(h),
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown policy {other:?}; expected uniform, hchoice or proximity"
            )))
        }
    };
    AssociationPolicy::new(kind, intensities).map_err(value_err)
}

fn profile(loads: Vec<u32>) -> PyResult<ProfileVector> {
    ProfileVector::from_unsorted(loads).map_err(value_err)
}

#[pyfunction]
fn log_factorial(n: u64) -> f64 {
    combinatorics::log_factorial(n).ln()
}

#[pyfunction]
fn binomial(n: u64, k: i64) -> f64 {
    combinatorics::binomial(n, k)
}

#[pyfunction]
#[pyo3(signature = (trials, p, j, eps=1e-15))]
fn binomial_cdf(trials: u32, p: f64, j: i64, eps: f64) -> PyResult<f64> {
    combinatorics::binomial_cdf(trials, p, j, eps).map_err(value_err)
}

#[pyfunction]
fn partition_count(users: u32, caches: u32) -> u128 {
    combinatorics::partition_count(users, caches)
}

/// Materializes the profile stream; refuses if it would exceed `limit`.
#[pyfunction]
#[pyo3(signature = (users, caches, limit=1_000_000))]
fn enumerate_profiles(users: u32, caches: u32, limit: u64) -> PyResult<Vec<Vec<u32>>> {
    let total = combinatorics::partition_count(users, caches);
    if total > limit as u128 {
        return Err(PyValueError::new_err(format!(
            "{total} profiles exceed limit={limit}"
        )));
    }
    Ok(combinatorics::enumerate_profiles(users, caches)
        .map(|p| p.loads().to_vec())
        .collect())
}

#[pyfunction]
fn multiplicity_groups(loads: Vec<u32>) -> PyResult<Vec<u32>> {
    Ok(profile(loads)?.multiplicity_groups().counts().to_vec())
}

#[pyfunction]
fn delay_of_profile(loads: Vec<u32>, cfg: &PyNetworkConfig) -> PyResult<f64> {
    exact::delay_of_profile(&profile(loads)?, &cfg.inner).map_err(value_err)
}

#[pyfunction]
fn profile_probability(loads: Vec<u32>, cfg: &PyNetworkConfig) -> PyResult<f64> {
    exact::profile_probability(&profile(loads)?, &cfg.inner).map_err(value_err)
}

#[pyfunction]
fn t_min(cfg: &PyNetworkConfig) -> f64 {
    exact::t_min(&cfg.inner)
}

#[pyfunction]
#[pyo3(signature = (cfg, budget=None))]
fn exact_average_delay(cfg: &PyNetworkConfig, budget: Option<u64>) -> PyResult<f64> {
    let budget = budget.unwrap_or(exact::DEFAULT_ENUMERATION_BUDGET);
    exact::exact_average_delay_with_budget(&cfg.inner, budget).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, limit=None))]
fn brute_force_average_delay(cfg: &PyNetworkConfig, limit: Option<f64>) -> PyResult<f64> {
    let limit = limit.unwrap_or(exact::DEFAULT_ASSOCIATION_LIMIT);
    exact::brute_force_average_delay_with_limit(&cfg.inner, limit).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, budget=None))]
fn deterioration(cfg: &PyNetworkConfig, budget: Option<u64>) -> PyResult<f64> {
    let budget = budget.unwrap_or(exact::DEFAULT_ENUMERATION_BUDGET);
    exact::deterioration_with_budget(&cfg.inner, budget).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (users, caches, budget=None))]
fn expected_rank_loads_exact(users: u32, caches: u32, budget: Option<u64>) -> PyResult<Vec<f64>> {
    let budget = budget.unwrap_or(exact::DEFAULT_ENUMERATION_BUDGET);
    exact::expected_rank_loads_exact(users, caches, budget).map_err(value_err)
}

#[pyfunction]
fn analytical_upper_bound(cfg: &PyNetworkConfig) -> f64 {
    bounds::analytical_upper_bound(&cfg.inner)
}

#[pyfunction]
fn analytical_lower_bound(cfg: &PyNetworkConfig) -> PyResult<f64> {
    bounds::analytical_lower_bound(&cfg.inner).map_err(value_err)
}

#[pyfunction]
fn expected_top_load_bounds(cfg: &PyNetworkConfig, rank: u32) -> PyResult<(f64, f64)> {
    let pair = bounds::expected_top_load_bounds(&cfg.inner, rank).map_err(value_err)?;
    Ok((pair.lower, pair.upper))
}

#[pyfunction]
#[pyo3(signature = (cfg, rho, budget=None))]
fn threshold_bounds(
    cfg: &PyNetworkConfig,
    rho: f64,
    budget: Option<u64>,
) -> PyResult<PyThresholdBounds> {
    let budget = budget.unwrap_or(exact::DEFAULT_ENUMERATION_BUDGET);
    let tb = bounds::threshold_bounds_with_budget(&cfg.inner, rho, budget).map_err(value_err)?;
    Ok(PyThresholdBounds {
        lower: tb.lower,
        upper: tb.upper,
        coverage: tb.coverage,
        requested: tb.requested,
        truncated: tb.truncated,
    })
}

#[pyfunction]
fn nonuniform_upper_bound(cfg: &PyNetworkConfig, intensities: Vec<f64>) -> PyResult<f64> {
    let p = IntensityVector::new(intensities).map_err(value_err)?;
    bounds::nonuniform_upper_bound(&cfg.inner, &p).map_err(value_err)
}

#[pyfunction]
fn nonuniform_lower_bound(cfg: &PyNetworkConfig, intensities: Vec<f64>) -> PyResult<f64> {
    let p = IntensityVector::new(intensities).map_err(value_err)?;
    bounds::nonuniform_lower_bound(&cfg.inner, &p).map_err(value_err)
}

#[pyfunction]
fn proximity_upper_bound(cfg: &PyNetworkConfig, h: u32) -> PyResult<f64> {
    bounds::proximity_upper_bound(&cfg.inner, h).map_err(value_err)
}

#[pyfunction]
fn zipf_intensities(caches: u32, alpha: f64) -> PyResult<Vec<f64>> {
    Ok(bounds::zipf_intensities(caches, alpha)
        .map_err(value_err)?
        .probs()
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (users, caches, seed, index=0, policy="uniform", h=1, alpha=None))]
fn sample_association(
    users: u32,
    caches: u32,
    seed: u64,
    index: u64,
    policy: &str,
    h: u32,
    alpha: Option<f64>,
) -> PyResult<Vec<u32>> {
    let policy = build_policy(caches, policy, h, alpha)?;
    let mut rng = simulation::substream(seed, index);
    Ok(simulation::sample_association(users, &policy, &mut rng)
        .loads()
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (cfg, samples, seed, policy="uniform", h=1, alpha=None))]
fn sbn_estimate(
    cfg: &PyNetworkConfig,
    samples: u64,
    seed: u64,
    policy: &str,
    h: u32,
    alpha: Option<f64>,
) -> PyResult<PySimulationReport> {
    let policy = build_policy(cfg.inner.caches(), policy, h, alpha)?;
    simulation::sbn_estimate(&cfg.inner, &policy, samples, seed)
        .map(Into::into)
        .map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, samples, seed, policy="uniform", h=1, alpha=None))]
fn empirical_rank_loads(
    cfg: &PyNetworkConfig,
    samples: u64,
    seed: u64,
    policy: &str,
    h: u32,
    alpha: Option<f64>,
) -> PyResult<Vec<f64>> {
    let policy = build_policy(cfg.inner.caches(), policy, h, alpha)?;
    simulation::empirical_rank_loads(&cfg.inner, &policy, samples, seed).map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (cache_grid, regime, samples, seed, policy="uniform", h=2, gamma=0.03125))]
#[allow(clippy::too_many_arguments)]
fn scaling_probe<'py>(
    py: Python<'py>,
    cache_grid: Vec<u32>,
    regime: &str,
    samples: u64,
    seed: u64,
    policy: &str,
    h: u32,
    gamma: f64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let regime = match regime {
        "linear" => ScalingRegime::Linear,
        "linear-log" => ScalingRegime::LinearLog,
        "quadratic" => ScalingRegime::Quadratic,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown regime {other:?}; expected linear, linear-log or quadratic"
            )))
        }
    };
    let kind = match policy {
        "uniform" => PolicyKind::Uniform,
        "hchoice" => PolicyKind::HChoice(h),
        "proximity" => PolicyKind::Proximity(h),
        other => return Err(PyValueError::new_err(format!("unknown policy {other:?}"))),
    };
    let rows = simulation::scaling_probe(&cache_grid, regime, kind, gamma, samples, seed)
        .map_err(value_err)?;
    rows.into_iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("caches", r.caches)?;
            d.set_item("users", r.users)?;
            d.set_item("t", r.redundancy)?;
            d.set_item("samples", r.samples)?;
            d.set_item("mean_delay", r.mean_delay)?;
            d.set_item("t_min", r.t_min)?;
            d.set_item("g_estimate", r.g_estimate)?;
            d.set_item("normalizer", r.normalizer)?;
            d.set_item("normalized", r.normalized)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn cachecalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetworkConfig>()?;
    m.add_class::<PyThresholdBounds>()?;
    m.add_class::<PySimulationReport>()?;
    m.add_function(wrap_pyfunction!(log_factorial, m)?)?;
    m.add_function(wrap_pyfunction!(binomial, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(partition_count, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_profiles, m)?)?;
    m.add_function(wrap_pyfunction!(multiplicity_groups, m)?)?;
    m.add_function(wrap_pyfunction!(delay_of_profile, m)?)?;
    m.add_function(wrap_pyfunction!(profile_probability, m)?)?;
    m.add_function(wrap_pyfunction!(t_min, m)?)?;
    m.add_function(wrap_pyfunction!(exact_average_delay, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_average_delay, m)?)?;
    m.add_function(wrap_pyfunction!(deterioration, m)?)?;
    m.add_function(wrap_pyfunction!(expected_rank_loads_exact, m)?)?;
    m.add_function(wrap_pyfunction!(analytical_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(analytical_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(expected_top_load_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(nonuniform_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(nonuniform_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(proximity_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(zipf_intensities, m)?)?;
    m.add_function(wrap_pyfunction!(sample_association, m)?)?;
    m.add_function(wrap_pyfunction!(sbn_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_rank_loads, m)?)?;
    m.add_function(wrap_pyfunction!(scaling_probe, m)?)?;
    Ok(())
}
