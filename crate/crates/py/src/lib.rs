//! Python bindings. Signomials are passed as JSON text or as a dict in the
//! core schema; structured results come back as plain Python objects.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;
use symsage::exactness::{self, ExactnessDecision};
use symsage::means::{self, Partition};
use symsage::{reference, sage, sonc, symmetry, Error, Flavor, Signomial, SupportSplit};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Numerical(_) | Error::CircuitBudget { .. } => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse(f: &Bound<'_, PyAny>) -> PyResult<Signomial> {
    let text: String = if f.is_instance_of::<PyDict>() {
        f.py().import("json")?.call_method1("dumps", (f,))?.extract()?
    } else {
        f.extract()?
    };
    Signomial::from_json(&text).map_err(py_err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn target(f: &Signomial) -> PyResult<Signomial> {
    Ok(match f.flavor() {
        Flavor::Signomial => f.clone(),
        Flavor::Polynomial => sonc::tilde(f).map_err(py_err)?.to_signomial(),
    })
}

/// Lower bound `f^SAGE` (or `f^SONC` for polynomials); `-inf` when unbounded.
#[pyfunction]
#[pyo3(signature = (f, symmetric = false, tol = 1e-9))]
fn bound(f: &Bound<'_, PyAny>, symmetric: bool, tol: f64) -> PyResult<f64> {
    let g = target(&parse(f)?)?;
    let b = if symmetric {
        symmetry::symmetric_sage_bound(&g, tol).map_err(py_err)?.0
    } else {
        sage::sage_bound(&g, tol).map_err(py_err)?.bound
    };
    Ok(b.value())
}

/// Membership certificate as a dict, or `None`.
#[pyfunction]
#[pyo3(signature = (f, symmetric = false, tol = 1e-9))]
fn member<'py>(py: Python<'py>, f: &Bound<'py, PyAny>, symmetric: bool, tol: f64) -> PyResult<Option<Bound<'py, PyAny>>> {
    let g = target(&parse(f)?)?;
    let split = SupportSplit::by_sign(&g);
    if symmetric {
        symmetry::is_symmetric_sage(&g, &split, tol).map_err(py_err)?.map(|d| to_py(py, &d)).transpose()
    } else {
        sage::is_sage(&g, &split, tol).map_err(py_err)?.map(|d| to_py(py, &d)).transpose()
    }
}

/// Exactness decision. Returns `None` outside the class.
#[pyfunction]
#[pyo3(signature = (f, relaxed_boundary = false, tol = 1e-9))]
fn exact<'py>(py: Python<'py>, f: &Bound<'py, PyAny>, relaxed_boundary: bool, tol: f64) -> PyResult<Option<Bound<'py, PyAny>>> {
    let g = parse(f)?.to_signomial();
    let (status, bound, cert) = match exactness::exactness_decide(&g, relaxed_boundary, tol).map_err(py_err)? {
        ExactnessDecision::NotInClass { .. } => return Ok(None),
        ExactnessDecision::Nonnegative { bound, certificate } => ("nonnegative", bound, certificate),
        ExactnessDecision::NegativeMinimum { bound, certificate } => ("negative_minimum", bound, certificate),
    };
    let out = PyDict::new(py);
    out.set_item("status", status)?;
    out.set_item("f_star", bound)?;
    out.set_item("t0", cert.profile.t0)?;
    out.set_item("threshold_w", cert.profile.w - bound)?;
    out.set_item("minimizer", cert.minimizer.clone())?;
    out.set_item("certificate", to_py(py, &*cert)?)?;
    Ok(Some(out.into_any()))
}

/// Certificate that `M_λ − c·M_μ ≥ δ` on the positive orthant, or `None`.
#[pyfunction]
#[pyo3(signature = (lam, mu, n, c = 1.0))]
fn muirhead<'py>(py: Python<'py>, lam: &str, mu: &str, n: usize, c: f64) -> PyResult<Option<Bound<'py, PyAny>>> {
    let (l, m) = (Partition::parse(lam).map_err(py_err)?, Partition::parse(mu).map_err(py_err)?);
    means::muirhead_certificate(&l, &m, c, n).map_err(py_err)?.map(|cert| to_py(py, &cert)).transpose()
}

/// Closed-form reference values for the quartic family.
#[pyfunction]
fn quartic_reference<'py>(py: Python<'py>, a: f64, b: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &reference::quartic_reference(a, b))
}

/// Closed-form reference values for the quadratic family in `n` variables.
#[pyfunction]
fn quadratic_reference<'py>(py: Python<'py>, n: usize, a: f64, b: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &reference::quadratic_reference(n, a, b).map_err(py_err)?)
}

#[pymodule]
fn pysymsage(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bound, m)?)?;
    m.add_function(wrap_pyfunction!(member, m)?)?;
    m.add_function(wrap_pyfunction!(exact, m)?)?;
    m.add_function(wrap_pyfunction!(muirhead, m)?)?;
    m.add_function(wrap_pyfunction!(quartic_reference, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_reference, m)?)?;
    Ok(())
}
