//! Python bindings: scenario verification, the demo run and a few backend
//! queries. Reports cross the boundary as JSON text.

use latgauge::verify::{self, Scenario};
use latgauge::{Error, Group};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn scenario_err(errs: Vec<String>) -> PyErr {
    PyValueError::new_err(errs.join("\n"))
}

fn lib_err(e: Error) -> PyErr {
    match e {
        Error::Scenario(errs) => scenario_err(errs),
        Error::Io(s) => PyRuntimeError::new_err(s),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn run_scenario(mut sc: Scenario, suites: Option<Vec<String>>, seed: Option<u64>) -> PyResult<String> {
    if let Some(s) = seed {
        sc.file.seed = s;
    }
    let suites = suites.unwrap_or_else(|| sc.suites());
    Ok(verify::run(&sc, &suites).map_err(lib_err)?.to_json())
}

/// `(suite, name, law, expected_fail)` for every registered check.
#[pyfunction]
fn list_checks() -> Vec<(&'static str, &'static str, &'static str, bool)> {
    verify::REGISTRY.iter().map(|c| (c.suite, c.name, c.law, c.expected_fail)).collect()
}

#[pyfunction]
fn suites() -> Vec<&'static str> {
    verify::SUITES.to_vec()
}

/// Runs a scenario given as JSON text and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (scenario_json, suites=None, seed=None))]
fn verify_json(py: Python<'_>, scenario_json: &str, suites: Option<Vec<String>>, seed: Option<u64>) -> PyResult<String> {
    let sc = verify::parse_scenario(scenario_json).map_err(scenario_err)?;
    py.detach(|| run_scenario(sc, suites, seed))
}

/// Runs a scenario file and returns the report as JSON.
#[pyfunction]
#[pyo3(signature = (path, suites=None, seed=None))]
fn verify_file(py: Python<'_>, path: std::path::PathBuf, suites: Option<Vec<String>>, seed: Option<u64>) -> PyResult<String> {
    let sc = verify::load_scenario(&path).map_err(scenario_err)?;
    py.detach(|| run_scenario(sc, suites, seed))
}

/// Shipped S3, U(1) and SU(2) scenarios; a JSON array of reports.
#[pyfunction]
#[pyo3(signature = (seed=None))]
fn demo(py: Python<'_>, seed: Option<u64>) -> PyResult<String> {
    py.detach(|| verify::demo(seed).map(|r| verify::reports_to_json(&r)).map_err(lib_err))
}

/// `(selector, lie dimension, cutoff)` of a backend selector.
#[pyfunction]
fn backend_info(selector: &str) -> PyResult<(String, usize, u32)> {
    let g = Group::parse(selector).map_err(lib_err)?;
    Ok((g.selector(), g.dim(), g.cutoff()))
}

/// Kernel-formula value of `theta^m e^{iN phi}` on mode `k` (normalized Haar measure).
#[pyfunction]
fn u1_kernel_formula(m: u32, n: i32, k: i32, eps: f64) -> Complex64 {
    latgauge::quantization::u1_kernel_formula(m, n, k, eps)
}

#[pymodule]
fn pylatgauge(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(list_checks, m)?)?;
    m.add_function(wrap_pyfunction!(suites, m)?)?;
    m.add_function(wrap_pyfunction!(verify_json, m)?)?;
    m.add_function(wrap_pyfunction!(verify_file, m)?)?;
    m.add_function(wrap_pyfunction!(demo, m)?)?;
    m.add_function(wrap_pyfunction!(backend_info, m)?)?;
    m.add_function(wrap_pyfunction!(u1_kernel_formula, m)?)?;
    m.add("SUPPORTED_BACKENDS", latgauge::group_backend::SUPPORTED_BACKENDS)?;
    Ok(())
}
