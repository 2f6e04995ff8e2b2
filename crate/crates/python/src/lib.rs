//! Python bindings. Results cross the boundary as JSON documents and come out
//! as plain dicts and lists on the Python side.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use sauav_core::config::ScenarioConfig;
use sauav_core::crypto::{
    check_auth, make_auth_with_nonce, CyclicGroup, KeyedHash, NodeKeys, SchnorrGroup, TrustedAuthority,
};
use sauav_core::kernel::SimTime;
use sauav_core::metrics::aggregate;
use sauav_core::protocol::NodeId;
use sauav_core::sim::run_scenario;
use sauav_core::sweep::{self, Axis};
use sauav_core::trace::{read_ndjson, to_ndjson};
use serde_json::{json, Value};

#[derive(Debug)]
pub enum BindError {
    Input(String),
    Run(String),
}

impl From<BindError> for PyErr {
    fn from(e: BindError) -> Self {
        match e {
            BindError::Input(m) => PyValueError::new_err(m),
            BindError::Run(m) => PyRuntimeError::new_err(m),
        }
    }
}

fn input(e: impl ToString) -> BindError {
    BindError::Input(e.to_string())
}

fn failed(e: impl ToString) -> BindError {
    BindError::Run(e.to_string())
}

pub fn load_config(
    toml_text: Option<&str>,
    seed: Option<u64>,
    defense: Option<bool>,
    range_m: Option<f64>,
) -> Result<ScenarioConfig, BindError> {
    let mut cfg = match toml_text {
        Some(t) => ScenarioConfig::from_toml(t).map_err(input)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = seed {
        cfg.scenario.seed = s;
    }
    if let Some(d) = defense {
        cfg.scenario.defense = d;
    }
    if let Some(r) = range_m {
        cfg.radio.range_m = r;
    }
    cfg.validate().map_err(input)?;
    Ok(cfg)
}

/// `{run, report}` plus `trace` (NDJSON text) when asked for.
pub fn run_json(cfg: &ScenarioConfig, trace: bool) -> Result<Value, BindError> {
    let out = run_scenario(cfg, trace).map_err(failed)?;
    let report = aggregate(std::slice::from_ref(&out.metrics)).map_err(failed)?;
    let mut doc = json!({ "run": out.metrics, "report": report });
    if trace {
        doc["trace"] = Value::String(to_ndjson(&out.trace));
    }
    Ok(doc)
}

pub fn sweep_json(cfg: &ScenarioConfig, axis: &str, values: &[f64], repeats: u32) -> Result<Value, BindError> {
    let axis: Axis = axis.parse().map_err(input)?;
    if repeats == 0 {
        return Err(input("repeats must be at least 1"));
    }
    for v in values {
        axis.apply(cfg, *v).validate().map_err(input)?;
    }
    let table = sweep::sweep(cfg, axis, values, repeats).map_err(failed)?;
    serde_json::to_value(table).map_err(failed)
}

pub fn verify_json(ndjson: &str) -> Result<Value, BindError> {
    let records = read_ndjson(ndjson.as_bytes()).map_err(input)?;
    serde_json::to_value(sauav_core::verify::verify(&records)).map_err(failed)
}

/// Toy-group (q = 101) authentication between identities `id_a` and `id_b`.
/// Returns `D'` and whether the receiver accepts it.
pub fn toy_auth(pr_ta: u64, id_a: u64, pa: u64, id_b: u64, pb: u64, nonce: u64) -> Result<(u64, bool), BindError> {
    let g = SchnorrGroup::toy();
    let mut ta = TrustedAuthority::new(g, pr_ta).map_err(input)?;
    let sa = ta.register(NodeId(0), id_a).map_err(input)?;
    let sb = ta.register(NodeId(1), id_b).map_err(input)?;
    let keys = |node, id, signed_id, private| NodeKeys::<SchnorrGroup> {
        node,
        id,
        signed_id,
        private: private % g.order(),
        public: g.base(private),
    };
    let a = keys(NodeId(0), id_a, sa, pa);
    let b = keys(NodeId(1), id_b, sb, pb);
    let msg = make_auth_with_nonce(&g, &a, b.public, ta.public_key(), nonce, SimTime::ZERO);
    let ok = check_auth(&g, &b, sa, a.public, ta.public_key(), &msg, SimTime::ZERO, SimTime::ZERO).is_ok();
    Ok((msg.d_prime.0, ok))
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<PyObject> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Default scenario as TOML text.
#[pyfunction]
fn default_config() -> String {
    ScenarioConfig::default().to_toml()
}

#[pyfunction]
#[pyo3(signature = (config=None, *, seed=None, defense=None, range_m=None, trace=false))]
fn run(
    py: Python<'_>,
    config: Option<&str>,
    seed: Option<u64>,
    defense: Option<bool>,
    range_m: Option<f64>,
    trace: bool,
) -> PyResult<PyObject> {
    let cfg = load_config(config, seed, defense, range_m)?;
    let doc = py.allow_threads(|| run_json(&cfg, trace))?;
    to_py(py, &doc)
}

#[pyfunction(name = "sweep")]
#[pyo3(signature = (config, axis, values, repeats=5, *, seed=None, defense=None, range_m=None))]
#[allow(clippy::too_many_arguments)]
fn sweep_py(
    py: Python<'_>,
    config: Option<&str>,
    axis: &str,
    values: Vec<f64>,
    repeats: u32,
    seed: Option<u64>,
    defense: Option<bool>,
    range_m: Option<f64>,
) -> PyResult<PyObject> {
    let cfg = load_config(config, seed, defense, range_m)?;
    let doc = py.allow_threads(|| sweep_json(&cfg, axis, &values, repeats))?;
    to_py(py, &doc)
}

/// Audits an NDJSON trace.
#[pyfunction]
fn verify(py: Python<'_>, trace: &str) -> PyResult<PyObject> {
    to_py(py, &verify_json(trace)?)
}

#[pyfunction]
fn toy_register(pr_ta: u64, id: u64) -> PyResult<u64> {
    let mut ta = TrustedAuthority::new(SchnorrGroup::toy(), pr_ta).map_err(input)?;
    Ok(ta.register(NodeId(0), id).map_err(input)?)
}

#[pyfunction]
fn toy_authenticate(pr_ta: u64, id_a: u64, pa: u64, id_b: u64, pb: u64, nonce: u64) -> PyResult<(u64, bool)> {
    Ok(toy_auth(pr_ta, id_a, pa, id_b, pb, nonce)?)
}

/// Keyed hash truncated to `width` bytes. The key must be 32 bytes.
#[pyfunction]
fn keyed_hash<'py>(py: Python<'py>, key: &[u8], data: &[u8], width: usize) -> PyResult<Bound<'py, PyBytes>> {
    let key: [u8; 32] = key.try_into().map_err(|_| PyValueError::new_err("key must be 32 bytes"))?;
    if width == 0 {
        return Err(PyValueError::new_err("width must be positive"));
    }
    Ok(PyBytes::new(py, KeyedHash::new(key, width).eval(data).as_bytes()))
}

#[pymodule]
fn sauav(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_py, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(toy_register, m)?)?;
    m.add_function(wrap_pyfunction!(toy_authenticate, m)?)?;
    m.add_function(wrap_pyfunction!(keyed_hash, m)?)?;
    Ok(())
}
