use choquard::grid::{make_grid, riesz_convolve as convolve, Field, RieszKernel};
use choquard::model::{validate_params, LimitingProblem};
use choquard::solver::{solve_limiting as solve, SolveOptions};
use choquard::special::{critical_mass_constant, hls_weighted_constant, riesz_normalization, scaling_exponent};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: choquard::Error) -> PyErr {
    use choquard::Error as E;
    match e {
        E::InvalidParameter(_)
        | E::AlphaOutOfRange { .. }
        | E::InvalidDimension(_)
        | E::NotPowerOfTwo(_)
        | E::NonPositiveExtent(_)
        | E::LengthMismatch { .. }
        | E::RegimeViolation(_) => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Regime of the limiting problem and the constants for `(dim, alpha, p)`.
#[pyfunction]
fn validate<'py>(py: Python<'py>, dim: usize, alpha: f64, p: f64) -> PyResult<Bound<'py, PyDict>> {
    let regime = validate_params(dim, alpha, p).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("solvable", regime.limiting_solvable)?;
    out.set_item("regime", regime.to_string())?;
    out.set_item("a_alpha", riesz_normalization(dim, alpha))?;
    out.set_item("c_alpha", hls_weighted_constant(dim, alpha))?;
    if regime.limiting_solvable {
        out.set_item("theta", scaling_exponent(dim, alpha, p))?;
    }
    out.set_item("critical_mass", critical_mass_constant(dim))?;
    Ok(out)
}

/// `I_alpha * f` for `f` sampled row-major on the `n^dim` grid over `[-L, L)^dim`.
#[pyfunction]
fn riesz_convolve(values: Vec<f64>, dim: usize, n: usize, half_extent: f64, alpha: f64) -> PyResult<Vec<f64>> {
    let grid = make_grid(dim, n, half_extent).map_err(to_py)?;
    let f = Field::new(grid, values).map_err(to_py)?;
    let kernel = RieszKernel::new(grid, alpha).map_err(to_py)?;
    Ok(convolve(&f, &kernel).map_err(to_py)?.into_values())
}

/// Ground state of `-Delta v + lambda v = (I_alpha * |v|^p)|v|^(p-2) v`.
#[pyfunction]
#[pyo3(signature = (dim, n, half_extent, alpha, p, lam=1.0, residual_tol=1e-8, max_iters=5000))]
#[allow(clippy::too_many_arguments)]
fn solve_limiting<'py>(
    py: Python<'py>,
    dim: usize,
    n: usize,
    half_extent: f64,
    alpha: f64,
    p: f64,
    lam: f64,
    residual_tol: f64,
    max_iters: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = make_grid(dim, n, half_extent).map_err(to_py)?;
    let problem = LimitingProblem::new(grid, alpha, p).map_err(to_py)?;
    let opts = SolveOptions { residual_tol, max_iters, ..SolveOptions::default() };
    // the solve holds no Python objects
    let r = py.allow_threads(|| solve(lam, &problem, &opts)).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("energy", r.energy)?;
    out.set_item("converged", r.converged)?;
    out.set_item("iterations", r.iterations)?;
    out.set_item("residual", r.residual_rel)?;
    out.set_item("values", r.field.into_values())?;
    Ok(out)
}

#[pymodule]
fn choquard_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_convolve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_limiting, m)?)?;
    Ok(())
}
