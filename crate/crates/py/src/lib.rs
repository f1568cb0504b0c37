//! Python bindings: config runs and a few direct spectral entry points.
//!
//! Errors map to `ValueError` (bad input), `ArithmeticError` (violated
//! mathematical precondition) and `RuntimeError` (no convergence).

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use roughlap_core::fem::System;
use roughlap_core::runs::{DomainSpec, RunConfig, RunReport, VERSION};
use roughlap_core::solve::{classical_steklov_spectrum, poincare_constant as poincare, trace_constant as trace};
use roughlap_core::Error;

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::NoConvergence { .. } | Error::SpectrumNotConverged { .. } => PyRuntimeError::new_err(msg),
        Error::Parse { .. } | Error::Invalid(_) | Error::Io(_) | Error::DimensionMismatch { .. } => {
            PyValueError::new_err(msg)
        }
        _ => PyArithmeticError::new_err(msg),
    }
}

fn run_json(text: &str) -> Result<RunReport, Error> {
    RunConfig::from_json(text)?.run()
}

fn domain_mesh(domain: &str, h: f64, level: usize) -> Result<roughlap_core::mesh::Mesh, Error> {
    let spec: DomainSpec = serde_json::from_str(domain).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    spec.mesh(h, level)
}

/// Run a JSON config; returns `{"outputs": {name: text}, "failure": str | None}`.
#[pyfunction]
fn run_config<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let report = py.detach(|| run_json(config)).map_err(py_err)?;
    let outputs = PyDict::new(py);
    for o in &report.outputs {
        outputs.set_item(&o.name, &o.contents)?;
    }
    let d = PyDict::new(py);
    d.set_item("outputs", outputs)?;
    d.set_item("failure", report.failure)?;
    Ok(d)
}

/// Poincaré constant of a domain (JSON domain spec) at a refinement level.
#[pyfunction]
#[pyo3(signature = (domain, h, level, tol = 1e-10))]
fn poincare_constant(py: Python<'_>, domain: &str, h: f64, level: usize, tol: f64) -> PyResult<f64> {
    py.detach(|| {
        let mesh = domain_mesh(domain, h, level)?;
        let sys = System::assemble(&mesh, None)?;
        poincare(&sys.stiffness, &sys.mass, tol)
    })
    .map_err(py_err)
}

/// Lowest classical Steklov eigenvalues.
#[pyfunction]
#[pyo3(signature = (domain, h, level, count, tol = 1e-8))]
fn steklov_eigenvalues(
    py: Python<'_>,
    domain: &str,
    h: f64,
    level: usize,
    count: usize,
    tol: f64,
) -> PyResult<Vec<f64>> {
    py.detach(|| {
        let mesh = domain_mesh(domain, h, level)?;
        let sys = System::assemble(&mesh, None)?;
        Ok(classical_steklov_spectrum(&sys.stiffness, &sys.trace, count, tol)?.eigenvalues)
    })
    .map_err(py_err)
}

/// Norm of the trace operator `H¹ → L²(∂D)`.
#[pyfunction]
fn trace_constant(py: Python<'_>, domain: &str, h: f64, level: usize) -> PyResult<f64> {
    py.detach(|| trace(&domain_mesh(domain, h, level)?)).map_err(py_err)
}

#[pymodule]
fn roughlap(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", VERSION)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(poincare_constant, m)?)?;
    m.add_function(wrap_pyfunction!(steklov_eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(trace_constant, m)?)?;
    Ok(())
}
