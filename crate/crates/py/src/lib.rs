//! Python bindings for the wsn-game simulator.
//!
//! ```python
//! import wsn_game_py as wg
//! cfg = wg.Config(seed=7, malicious=[3], hw_fault_fraction=0.2)
//! res = wg.run_simulation(cfg)
//! print(res.equilibrium_round, res.hwl, res.dt)
//! ```

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict, PyFloat, PyInt, PyList, PyString, PyTuple};

use wsn_game::baselines::{self, ScenarioId};
use wsn_game::game::{self, ActionPair, ChAction, CmAction, GameWeights, WindowOutcome};
use wsn_game::metrics::{self, Format, MetricsBundle};
use wsn_game::radio::{self, Environment, RadioProfile};
use wsn_game::sim::{self, Classification};
use wsn_game::{Error, SimConfig};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_toml(value: &Bound<'_, PyAny>) -> PyResult<toml::Value> {
    if value.is_instance_of::<PyBool>() {
        Ok(toml::Value::Boolean(value.extract()?))
    } else if value.is_instance_of::<PyInt>() {
        Ok(toml::Value::Integer(value.extract()?))
    } else if value.is_instance_of::<PyFloat>() {
        Ok(toml::Value::Float(value.extract()?))
    } else if value.is_instance_of::<PyString>() {
        Ok(toml::Value::String(value.extract()?))
    } else if value.is_instance_of::<PyList>() || value.is_instance_of::<PyTuple>() {
        let items = value
            .try_iter()?
            .map(|item| to_toml(&item?))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(toml::Value::Array(items))
    } else {
        Err(PyValueError::new_err(format!(
            "unsupported configuration value {}",
            value.repr()?
        )))
    }
}

fn parse_scenario(name: &str) -> PyResult<ScenarioId> {
    name.parse().map_err(to_py)
}

fn parse_pair(ch: &str, cm: &str) -> PyResult<ActionPair> {
    let ch = match ch {
        "B" => ChAction::Beacon,
        "NB" => ChAction::NoBeacon,
        other => {
            return Err(PyValueError::new_err(format!(
                "cluster-head action must be B or NB, got {other:?}"
            )))
        }
    };
    let cm = match cm {
        "D" => CmAction::Drop,
        "ND" => CmAction::NoDrop,
        other => {
            return Err(PyValueError::new_err(format!(
                "member action must be D or ND, got {other:?}"
            )))
        }
    };
    Ok(ActionPair::new(ch, cm))
}

/// Validated simulation configuration. Keyword arguments override defaults.
#[pyclass(name = "Config", frozen)]
struct PyConfig {
    inner: SimConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (**overrides))]
    fn new(overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut table = toml::Table::new();
        if let Some(d) = overrides {
            for (k, v) in d.iter() {
                table.insert(k.extract::<String>()?, to_toml(&v)?);
            }
        }
        let inner =
            SimConfig::from_toml_str(&toml::to_string(&table).map_err(|e| PyValueError::new_err(e.to_string()))?)
                .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Load a configuration file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        SimConfig::load(&path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn n_cms(&self) -> u32 {
        self.inner.n_cms
    }

    #[getter]
    fn n_rounds(&self) -> u32 {
        self.inner.n_rounds()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn env(&self) -> String {
        self.inner.env.clone()
    }

    #[getter]
    fn doi(&self) -> f64 {
        self.inner.doi()
    }

    fn __repr__(&self) -> String {
        format!("Config({:?})", self.inner)
    }
}

/// Outcome of one run.
#[pyclass(name = "SimResult", frozen)]
struct PySimResult {
    inner: sim::SimResult,
    bundle: MetricsBundle,
}

impl PySimResult {
    fn wrap(inner: sim::SimResult) -> PyResult<Self> {
        let bundle = MetricsBundle::from_result(&inner, 0.0).map_err(to_py)?;
        Ok(Self { inner, bundle })
    }

    fn write(&self, path: PathBuf, format: Format) -> PyResult<()> {
        metrics::export(&self.inner, format, &path).map_err(to_py)
    }
}

#[pymethods]
impl PySimResult {
    #[getter]
    fn scenario(&self) -> &'static str {
        self.inner.scenario.as_str()
    }

    /// Average summed utility per round.
    #[getter]
    fn dt(&self) -> PyResult<f64> {
        self.inner.dt().map_err(to_py)
    }

    /// Per-round DT normalized by the cooperative optimum.
    #[getter]
    fn dt_series(&self) -> Vec<f64> {
        self.bundle.dt_series.clone()
    }

    #[getter]
    fn equilibrium_round(&self) -> Option<u32> {
        self.inner.equilibrium_round
    }

    #[getter]
    fn hwl(&self) -> Vec<u32> {
        self.inner.hwl.clone()
    }

    #[getter]
    fn malicious_ids(&self) -> Vec<u32> {
        self.inner.malicious_ids.clone()
    }

    #[getter]
    fn faulty_ids(&self) -> Vec<u32> {
        self.inner.faulty_ids().into_iter().collect()
    }

    /// "benevolent", "malicious" or "hw_failure" per member.
    #[getter]
    fn classifications(&self) -> Vec<&'static str> {
        self.inner
            .classifications
            .iter()
            .map(|c| match c {
                Classification::Benevolent => "benevolent",
                Classification::Malicious => "malicious",
                Classification::HwFailure => "hw_failure",
            })
            .collect()
    }

    /// Mean post-forgiveness normalized utility of each member, in percent.
    #[getter]
    fn norm_utilities(&self) -> Vec<f64> {
        self.bundle.per_cm_norm_utils.clone()
    }

    #[getter]
    fn packets(&self) -> u64 {
        self.bundle.pkt_counts.values().sum()
    }

    /// Energy wasted on retransmissions, denied sleep and bad windows, in joules.
    #[getter]
    fn lost_power(&self) -> f64 {
        self.bundle.lost_power_joules
    }

    #[getter]
    fn n_rounds(&self) -> usize {
        self.inner.n_rounds()
    }

    fn to_csv(&self, path: PathBuf) -> PyResult<()> {
        self.write(path, Format::Csv)
    }

    fn to_jsonl(&self, path: PathBuf) -> PyResult<()> {
        self.write(path, Format::Jsonl)
    }

    fn __repr__(&self) -> String {
        format!(
            "SimResult(scenario={}, rounds={}, equilibrium_round={:?}, hwl={:?})",
            self.inner.scenario,
            self.inner.n_rounds(),
            self.inner.equilibrium_round,
            self.inner.hwl
        )
    }
}

/// Energy in joules to send one packet at power level `level`.
#[pyfunction]
#[pyo3(signature = (level=31, packet_len_bits=1024))]
fn transmission_cost(level: u8, packet_len_bits: u32) -> PyResult<f64> {
    radio::transmission_cost(&RadioProfile::default(), level, packet_len_bits).map_err(to_py)
}

#[pyfunction]
fn direction_coefficient(theta_deg: f64, doi: f64, draw: f64) -> PyResult<f64> {
    radio::direction_coefficient(theta_deg, doi, draw).map_err(to_py)
}

/// Path loss in dB for environment `env` at `distance_m`.
#[pyfunction]
#[pyo3(signature = (env, distance_m, shadow_db=0.0, theta_deg=0.0, doi=0.0055, draw=0.5, isotropic=true))]
fn path_loss(
    env: &str,
    distance_m: f64,
    shadow_db: f64,
    theta_deg: f64,
    doi: f64,
    draw: f64,
    isotropic: bool,
) -> PyResult<f64> {
    let params = env.parse::<Environment>().map_err(to_py)?.params();
    let geom = radio::LinkGeometry {
        distance_m,
        theta_deg,
        doi,
        isotropic,
        direction_draw: draw,
    };
    radio::path_loss(&params, &geom, &RadioProfile::default(), shadow_db).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (tc_joules, pl_db, noise_dbm, reference_j=radio::DEFAULT_TC_REFERENCE_J))]
fn rssi_score(tc_joules: f64, pl_db: f64, noise_dbm: f64, reference_j: f64) -> PyResult<f64> {
    radio::rssi_score(tc_joules, pl_db, noise_dbm, reference_j).map_err(to_py)
}

/// Punishment in joules for the pair `(ch, cm)`, e.g. `punishment("NB", "D", 40, 100)`.
#[pyfunction]
#[pyo3(signature = (ch, cm, forwarded, tp=100, packet_len_bits=1024, eb_joules=50e-9))]
fn punishment(ch: &str, cm: &str, forwarded: u32, tp: u32, packet_len_bits: u32, eb_joules: f64) -> PyResult<f64> {
    let weights = GameWeights {
        tp,
        packet_len_bits,
        eb_joules_per_bit: eb_joules,
        ..GameWeights::default()
    };
    weights.validate().map_err(to_py)?;
    Ok(game::punishment(
        parse_pair(ch, cm)?,
        WindowOutcome::new(forwarded, tp),
        &weights,
    ))
}

#[pyfunction]
fn reliability(forwarded: u32, tp: u32) -> PyResult<f64> {
    if tp == 0 {
        return Err(PyValueError::new_err("tp must be at least 1"));
    }
    Ok(game::reliability(WindowOutcome::new(forwarded, tp)))
}

#[pyfunction]
fn forgiveness_round(cm_id: u32, n_cms: u32) -> u32 {
    sim::forgiveness_round(cm_id, n_cms)
}

#[pyfunction]
fn run_simulation(py: Python<'_>, config: &PyConfig) -> PyResult<PySimResult> {
    let cfg = config.inner.clone();
    let res = py.detach(move || sim::run_simulation(&cfg)).map_err(to_py)?;
    PySimResult::wrap(res)
}

/// Run one of "oneshot_nb_nd", "oneshot_b_d", "oneshot_nb_d".
#[pyfunction]
fn run_one_shot(py: Python<'_>, scenario: &str, config: &PyConfig) -> PyResult<PySimResult> {
    let id = parse_scenario(scenario)?;
    let cfg = config.inner.clone();
    let res = py.detach(move || baselines::run_one_shot(id, &cfg)).map_err(to_py)?;
    PySimResult::wrap(res)
}

#[pyfunction]
fn run_no_defense(py: Python<'_>, config: &PyConfig) -> PyResult<PySimResult> {
    let cfg = config.inner.clone();
    let res = py.detach(move || baselines::run_no_defense(&cfg)).map_err(to_py)?;
    PySimResult::wrap(res)
}

/// Run every scenario on the same seed; returns `{scenario: SimResult}`.
#[pyfunction]
fn compare<'py>(py: Python<'py>, config: &PyConfig) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    for id in ScenarioId::ALL {
        let cfg = config.inner.clone();
        let res = py.detach(move || baselines::run(id, &cfg)).map_err(to_py)?;
        out.set_item(id.as_str(), PySimResult::wrap(res)?)?;
    }
    Ok(out)
}

#[pymodule]
fn wsn_game_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyConfig>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(transmission_cost, m)?)?;
    m.add_function(wrap_pyfunction!(direction_coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(path_loss, m)?)?;
    m.add_function(wrap_pyfunction!(rssi_score, m)?)?;
    m.add_function(wrap_pyfunction!(punishment, m)?)?;
    m.add_function(wrap_pyfunction!(reliability, m)?)?;
    m.add_function(wrap_pyfunction!(forgiveness_round, m)?)?;
    m.add_function(wrap_pyfunction!(run_simulation, m)?)?;
    m.add_function(wrap_pyfunction!(run_one_shot, m)?)?;
    m.add_function(wrap_pyfunction!(run_no_defense, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}
