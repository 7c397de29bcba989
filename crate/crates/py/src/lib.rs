//! Python bindings. Results come back as plain dicts, lists and floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use ratiocut_core::dynamics::{iterate as run_iterate, CurvilinearQuad, DynamicsOptions};
use ratiocut_core::geometry::{self, DEFAULT_GATE};
use ratiocut_core::graphlap::{
    bipartition, interface_x, inverse_power_method, sample_domain, AffinityGraph, IpmOptions,
};
use ratiocut_core::perturbation::{self as pert, Order};
use ratiocut_core::ratiocut::{optimize_cut as run_optimize, ratio_cut_gated};
use ratiocut_core::sweep::{run_sweep, SweepOptions, SweepSpec};
use ratiocut_core::{CutParams, DomainParams, OptimizeOptions, Param};
use serde_json::Value;

fn err(e: ratiocut_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py(py: Python<'_>, v: &Value) -> PyResult<Py<PyAny>> {
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n
                .as_f64()
                .unwrap_or(f64::NAN)
                .into_pyobject(py)?
                .into_any()
                .unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let items = a
                .iter()
                .map(|x| to_py(py, x))
                .collect::<PyResult<Vec<_>>>()?;
            PyList::new(py, items)?.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

fn serialized(py: Python<'_>, v: &impl serde::Serialize) -> PyResult<Py<PyAny>> {
    let value = serde_json::to_value(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &value)
}

/// σ from a mapping of parameter names (`a1`, `eps_t`, `A_WL`, ...) to values.
fn sigma_from(sigma: Option<&Bound<'_, PyDict>>) -> PyResult<DomainParams> {
    let mut s = DomainParams::zero();
    if let Some(d) = sigma {
        for (k, v) in d.iter() {
            let p: Param = k.extract::<String>()?.parse().map_err(err)?;
            s.set(p, v.extract()?);
        }
    }
    Ok(s)
}

#[pyfunction]
#[pyo3(signature = (cut, sigma=None, gate=DEFAULT_GATE))]
fn ratio_cut(
    py: Python<'_>,
    cut: (f64, f64, f64),
    sigma: Option<&Bound<'_, PyDict>>,
    gate: f64,
) -> PyResult<Py<PyAny>> {
    let c = CutParams::new(cut.0, cut.1, cut.2);
    let b = ratio_cut_gated(&sigma_from(sigma)?, &c, gate).map_err(err)?;
    serialized(py, &b)
}

#[pyfunction]
#[pyo3(signature = (sigma=None, gate=DEFAULT_GATE))]
fn optimize_cut(
    py: Python<'_>,
    sigma: Option<&Bound<'_, PyDict>>,
    gate: f64,
) -> PyResult<Py<PyAny>> {
    let opts = OptimizeOptions {
        gate,
        ..OptimizeOptions::default()
    };
    let r = run_optimize(&sigma_from(sigma)?, &opts).map_err(err)?;
    serialized(py, &r)
}

#[pyfunction]
#[pyo3(signature = (sigma=None, order="first", gate=DEFAULT_GATE))]
fn predict_cut(
    sigma: Option<&Bound<'_, PyDict>>,
    order: &str,
    gate: f64,
) -> PyResult<(f64, f64, f64)> {
    let order: Order = order.parse().map_err(err)?;
    let c = pert::predict_cut_gated(&sigma_from(sigma)?, order, gate).map_err(err)?;
    Ok((c.q, c.p, c.theta))
}

#[pyfunction]
fn cap_area(chord: f64, theta: f64) -> PyResult<f64> {
    geometry::cap_area(chord, theta).map_err(err)
}

#[pyfunction]
fn arc_length(chord: f64, theta: f64) -> f64 {
    geometry::arc_length(chord, theta)
}

#[pyfunction]
fn coefficients_json() -> String {
    pert::coefficients_json()
}

/// Rows of a sweep given as `path:lo:hi[:count]`.
#[pyfunction]
#[pyo3(signature = (spec, gate=DEFAULT_GATE, order="first"))]
fn sweep(py: Python<'_>, spec: &str, gate: f64, order: &str) -> PyResult<Py<PyAny>> {
    let spec: SweepSpec = spec.parse().map_err(err)?;
    let opts = SweepOptions {
        gate,
        order: order.parse().map_err(err)?,
        ..SweepOptions::default()
    };
    let res = run_sweep(&spec, &opts);
    serialized(py, &res.rows)
}

/// Trajectory records starting from the parabolic trapezoid of `sigma`.
#[pyfunction]
#[pyo3(signature = (sigma=None, steps=5, policy="away-from-original"))]
fn iterate(
    py: Python<'_>,
    sigma: Option<&Bound<'_, PyDict>>,
    steps: usize,
    policy: &str,
) -> PyResult<Py<PyAny>> {
    let q0 = CurvilinearQuad::from_sigma(&sigma_from(sigma)?).map_err(err)?;
    let traj = run_iterate(
        &q0,
        steps,
        policy.parse().map_err(err)?,
        &DynamicsOptions::default(),
    );
    let out = PyDict::new(py);
    out.set_item("records", serialized(py, &traj.records)?)?;
    out.set_item("stopped", serialized(py, &traj.stopped)?)?;
    Ok(out.into_any().unbind())
}

/// Inverse power method bipartition of a `width × height` rectangle cloud.
#[pyfunction]
#[pyo3(signature = (n=2000, seed=0, k=10, width=2.0, height=1.0))]
fn graph_cut(
    py: Python<'_>,
    n: usize,
    seed: u64,
    k: usize,
    width: f64,
    height: f64,
) -> PyResult<Py<PyAny>> {
    let q = CurvilinearQuad::rectangle(width, height).map_err(err)?;
    let cloud = sample_domain(&q, n, seed).map_err(err)?;
    let g = AffinityGraph::knn_gaussian(&cloud.points, k, None).map_err(err)?;
    let res = inverse_power_method(
        &g,
        &IpmOptions {
            seed,
            ..IpmOptions::default()
        },
    )
    .map_err(err)?;
    let (a, b) = bipartition(&res.f).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item(
        "interface_x",
        interface_x(&cloud.points, &a, &b).map_err(err)?,
    )?;
    out.set_item("lambda", res.lambda)?;
    out.set_item("monotone", res.monotone())?;
    out.set_item("sizes", (a.len(), b.len()))?;
    out.set_item("f", res.f)?;
    Ok(out.into_any().unbind())
}

#[pymodule]
fn ratiocut(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ratio_cut, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_cut, m)?)?;
    m.add_function(wrap_pyfunction!(predict_cut, m)?)?;
    m.add_function(wrap_pyfunction!(cap_area, m)?)?;
    m.add_function(wrap_pyfunction!(arc_length, m)?)?;
    m.add_function(wrap_pyfunction!(coefficients_json, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(graph_cut, m)?)?;
    Ok(())
}
