//! Python bindings for the core toolkit. Field data crosses the boundary as
//! plain lists of floats; structured reports cross as JSON strings so the
//! Python side can `json.loads` them without a mirrored class hierarchy.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use lichnerowicz::analysis::{check_assumptions, compute_bracket};
use lichnerowicz::coefficients::{manufacture_h, validate_coefficients, CoefficientSet};
use lichnerowicz::grid::{field_max, field_min, make_grid, norm_inf, Grid as CoreGrid, ScalarField};
use lichnerowicz::nonexistence::{ne_conditions, oracle_check};
use lichnerowicz::solver::{outer_solve, residual, verify_solution, InnerMethod, SolverConfig};
use lichnerowicz::truncation::TruncationContext;

fn err(e: lichnerowicz::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Periodic uniform grid on a d-dimensional torus.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyGrid {
    inner: CoreGrid,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(d: usize, n: Vec<usize>, periods: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: make_grid(d, &n, &periods).map_err(err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Grid(d={}, n={:?})", self.inner.dim(), self.inner.sizes())
    }
}

/// Scalar field sampled on a grid.
#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyField {
    inner: ScalarField,
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn constant(grid: &PyGrid, value: f64) -> Self {
        Self {
            inner: ScalarField::constant(&grid.inner, value),
        }
    }

    #[staticmethod]
    fn from_values(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: ScalarField::from_values(&grid.inner, values).map_err(err)?,
        })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn min(&self) -> f64 {
        field_min(&self.inner)
    }

    fn max(&self) -> f64 {
        field_max(&self.inner)
    }

    fn norm_inf(&self) -> f64 {
        norm_inf(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }
}

/// Coefficient data (a, b, csq, dsq, cd, h) with the dimension parameter N.
#[pyclass(name = "CoefficientSet", frozen)]
pub struct PyCoefficientSet {
    inner: CoefficientSet,
}

#[pymethods]
impl PyCoefficientSet {
    /// Constant coefficients on a grid.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn constants(
        grid: &PyGrid,
        n: u32,
        a: f64,
        b: f64,
        csq: f64,
        dsq: f64,
        cd: f64,
        h: f64,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: CoefficientSet::constants(&grid.inner, n, a, b, csq, dsq, cd, h).map_err(err)?,
        })
    }

    /// Coefficients from spatially varying fields.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn from_fields(
        n: u32,
        a: &PyField,
        b: &PyField,
        csq: &PyField,
        dsq: &PyField,
        cd: &PyField,
        h: &PyField,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: CoefficientSet::new(
                n,
                a.inner.clone(),
                b.inner.clone(),
                csq.inner.clone(),
                dsq.inner.clone(),
                cd.inner.clone(),
                h.inner.clone(),
            )
            .map_err(err)?,
        })
    }

    /// Manufactures h so that `u_star` solves the equation exactly.
    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn manufactured(
        u_star: &PyField,
        a: &PyField,
        b: &PyField,
        csq: &PyField,
        dsq: &PyField,
        cd: &PyField,
        n: u32,
    ) -> PyResult<Self> {
        Ok(Self {
            inner: manufacture_h(
                &u_star.inner,
                &a.inner,
                &b.inner,
                &csq.inner,
                &dsq.inner,
                &cd.inner,
                n,
            )
            .map_err(err)?,
        })
    }

    /// The zeroth-order coefficient q = h - csq as a field.
    fn q(&self) -> PyField {
        PyField {
            inner: self.inner.q(),
        }
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n_param()
    }
}

/// Assumption checks (A1)-(A4) plus sanity validation, as a JSON string.
#[pyfunction]
fn check(cs: &PyCoefficientSet) -> PyResult<String> {
    let assumptions = check_assumptions(&cs.inner).map_err(err)?;
    let validation = validate_coefficients(&cs.inner);
    to_json(&serde_json::json!({
        "assumptions": assumptions,
        "validation": validation,
    }))
}

/// Constant sub/supersolution bracket (theta_low, theta_high, delta0).
#[pyfunction]
fn bracket(cs: &PyCoefficientSet) -> PyResult<(f64, f64, f64)> {
    let report = check_assumptions(&cs.inner).map_err(err)?;
    let b = compute_bracket(&cs.inner, &report).map_err(err)?;
    Ok((b.theta_low, b.theta_high, b.delta0))
}

/// Monotone solve; returns the solution field and the solve report as JSON.
#[pyfunction]
#[pyo3(signature = (cs, method = "contraction"))]
fn solve(cs: &PyCoefficientSet, method: &str) -> PyResult<(PyField, String)> {
    let inner_method = match method {
        "contraction" => InnerMethod::Contraction,
        "newton" => InnerMethod::Newton,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown inner method '{other}' (expected 'contraction' or 'newton')"
            )))
        }
    };
    let report = check_assumptions(&cs.inner).map_err(err)?;
    if !report.all_pass {
        return Err(PyValueError::new_err(
            "assumptions (A1)-(A4) do not hold for this coefficient set",
        ));
    }
    let b = compute_bracket(&cs.inner, &report).map_err(err)?;
    let ctx = TruncationContext::new(&cs.inner, b).map_err(err)?;
    let cfg = SolverConfig {
        inner_method,
        ..SolverConfig::default()
    };
    let solve = outer_solve(&cs.inner, &ctx, &cfg).map_err(err)?;
    let json = to_json(&solve)?;
    Ok((PyField { inner: solve.u }, json))
}

/// Untruncated residual norms (inf, L2) of a candidate solution.
#[pyfunction]
fn residual_norms(u: &PyField, cs: &PyCoefficientSet) -> PyResult<(f64, f64)> {
    let (_, res_inf, res_l2) = residual(&u.inner, &cs.inner).map_err(err)?;
    Ok((res_inf, res_l2))
}

/// Full verification report (residuals + bracket membership) as JSON.
#[pyfunction]
fn verify(u: &PyField, cs: &PyCoefficientSet) -> PyResult<String> {
    let report = check_assumptions(&cs.inner).map_err(err)?;
    let b = compute_bracket(&cs.inner, &report).map_err(err)?;
    to_json(&verify_solution(&u.inner, &cs.inner, &b).map_err(err)?)
}

/// Nonexistence conditions NE0-NE5 plus the pointwise oracle, as JSON.
#[pyfunction]
#[pyo3(name = "nonexistence")]
fn nonexistence_report(cs: &PyCoefficientSet) -> PyResult<String> {
    to_json(&ne_conditions(&cs.inner).map_err(err)?)
}

/// Whether the pointwise oracle certifies nonexistence, with its margin.
#[pyfunction]
fn oracle(cs: &PyCoefficientSet) -> PyResult<(bool, f64)> {
    let out = oracle_check(&cs.inner).map_err(err)?;
    Ok((out.certified, out.min_margin))
}

/// Minimizer and minimum of z -> d z^N - b z + a z^(1-N) over z > 0.
#[pyfunction]
#[pyo3(name = "pointwise_min_f")]
fn pointwise_min_f_py(a: f64, b: f64, d: f64, n: u32) -> PyResult<(f64, f64)> {
    let r = lichnerowicz::nonexistence::pointwise_min_f(a, b, d, n).map_err(err)?;
    Ok((r.z_bar, r.f_min))
}

/// Closed-form lower bound on the pointwise minimum for b <= 0.
#[pyfunction]
#[pyo3(name = "ne1_bound")]
fn ne1_bound_py(a: f64, b: f64, d: f64, n: u32) -> f64 {
    lichnerowicz::nonexistence::ne1_bound(a, b, d, n)
}

#[pymodule]
fn lichnerowicz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyCoefficientSet>()?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(bracket, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(residual_norms, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(nonexistence_report, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(pointwise_min_f_py, m)?)?;
    m.add_function(wrap_pyfunction!(ne1_bound_py, m)?)?;
    Ok(())
}
