//! Python bindings. Structured results cross over as JSON and come back as dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;
use thinwall::cascade::build_expansion;
use thinwall::cell::solve_cell;
use thinwall::corner::SingularExponents;
use thinwall::exact::solve_exact as exact;
use thinwall::geometry::Side;
use thinwall::harness::{fit_slope as fit, parse_config, StudyConfig};
use thinwall::nearfield::solve_s;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn config(text: Option<&str>) -> PyResult<StudyConfig> {
    match text {
        Some(t) => parse_config(t).map_err(err),
        None => Ok(StudyConfig::reference()),
    }
}

fn to_dict<'py>(py: Python<'py>, v: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(err)?;
    py.import("json")?.call_method1("loads", (s,))
}

/// J_ν(x) and Y_ν(x).
#[pyfunction]
fn bessel_jy(nu: f64, x: f64) -> PyResult<(f64, f64)> {
    thinwall::special::bessel_jy(nu, x).map_err(err)
}

/// Slope and intercept of ln e against ln δ.
#[pyfunction]
fn fit_slope(deltas: Vec<f64>, errors: Vec<f64>) -> PyResult<(f64, f64)> {
    let pairs: Vec<(f64, f64)> = deltas.into_iter().zip(errors).collect();
    let f = fit(&pairs).map_err(err)?;
    Ok((f.slope, f.intercept))
}

#[pyfunction]
#[pyo3(signature = (config_text=None))]
fn cell_constants<'py>(py: Python<'py>, config_text: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(config_text)?;
    let p = &cfg.params;
    let c = py.detach(|| solve_cell(p.hole.as_ref(), &p.khat, p.k0, &cfg.cascade.cell)).map_err(err)?;
    to_dict(py, &c.constants)
}

/// 𝓛 fit of the corner problem on one side ("plus" or "minus").
#[pyfunction]
#[pyo3(signature = (side="plus", config_text=None))]
fn nearfield<'py>(py: Python<'py>, side: &str, config_text: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(config_text)?;
    let side: Side = side.parse().map_err(err)?;
    let p = &cfg.params;
    let fit = py
        .detach(|| -> thinwall::Result<_> {
            let e = SingularExponents::new(p.theta)?;
            let cell = solve_cell(p.hole.as_ref(), &p.khat, p.k0, &cfg.cascade.cell)?;
            Ok(solve_s(side, 1, &e, &cell.constants, p.hole.as_ref(), Some(&cell), &cfg.cascade.nearfield)?.fit)
        })
        .map_err(err)?;
    to_dict(py, &fit)
}

#[pyfunction]
#[pyo3(signature = (config_text=None))]
fn cascade<'py>(py: Python<'py>, config_text: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(config_text)?;
    let set = py.detach(|| build_expansion(&cfg.params, &cfg.cascade)).map_err(err)?;
    to_dict(py, &set.summary())
}

/// Direct solve at one δ; returns the mesh descriptor, dof count and solver residual.
#[pyfunction]
#[pyo3(signature = (delta, config_text=None))]
fn solve_exact<'py>(py: Python<'py>, delta: f64, config_text: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let cfg = config(config_text)?;
    let r = py.detach(|| exact(&cfg.params, delta, &cfg.exact)).map_err(err)?;
    let out = serde_json::json!({ "mesh": r.mesh, "ndof": r.ndof, "residual": r.residual });
    to_dict(py, &out)
}

#[pymodule(name = "thinwall")]
fn py_thinwall(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bessel_jy, m)?)?;
    m.add_function(wrap_pyfunction!(fit_slope, m)?)?;
    m.add_function(wrap_pyfunction!(cell_constants, m)?)?;
    m.add_function(wrap_pyfunction!(nearfield, m)?)?;
    m.add_function(wrap_pyfunction!(cascade, m)?)?;
    m.add_function(wrap_pyfunction!(solve_exact, m)?)?;
    Ok(())
}
