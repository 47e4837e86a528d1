//! Python bindings: `import dicke_phase`.
//!
//! Functions take plain floats and return Python tuples, lists and dicts;
//! invalid arguments raise `ValueError`, solver failures `RuntimeError`.

use std::path::PathBuf;

use dicke_phase::collective::DickeBasis;
use dicke_phase::liouville::{build_liouvillian, liouvillian_gap_with, magnetization, steady_state_detailed, GapMethod, SpectralOptions};
use dicke_phase::meanfield;
use dicke_phase::{BlochVector, Error, ModelParams};
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::TooLarge { .. } => {
            PyValueError::new_err(e.to_string())
        }
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn params(v: f64, g: f64, p: f64, gamma: f64, n: Option<usize>) -> PyResult<ModelParams> {
    let mut m = ModelParams::new(v, g, p).with_gamma(gamma);
    m.n = n;
    m.validate().map_err(to_py)?;
    Ok(m)
}

type Triple = (f64, f64, f64);

fn triple(s: BlochVector) -> Triple {
    (s.x, s.y, s.z)
}

/// Stable steady state of the p = 1 model (Eq. 9), or None where it does not exist.
#[pyfunction]
#[pyo3(signature = (v, g, gamma = 1.0))]
fn analytic_p1(v: f64, g: f64, gamma: f64) -> PyResult<Option<Triple>> {
    Ok(meanfield::analytic_p1(&params(v, g, 1.0, gamma, None)?).map_err(to_py)?.map(triple))
}

/// All real fixed points of the p = 0 model as (label, (X, Y, Z)).
#[pyfunction]
#[pyo3(signature = (v, g, gamma = 1.0))]
fn analytic_p0(v: f64, g: f64, gamma: f64) -> PyResult<Vec<(String, Triple)>> {
    let sols = meanfield::analytic_p0(&params(v, g, 0.0, gamma, None)?).map_err(to_py)?;
    Ok(sols.into_iter().map(|s| (s.branch.label().to_string(), triple(s.state))).collect())
}

/// Signed critical drives (g_+^c, g_-^c) of the p = 0 model, or None for 4V^2 < gamma^2.
#[pyfunction]
#[pyo3(signature = (v, gamma = 1.0))]
fn p0_critical_points(v: f64, gamma: f64) -> Option<(f64, f64)> {
    meanfield::p0_critical_points(v, gamma)
}

/// |g_c| of the p = 1 model.
#[pyfunction]
#[pyo3(signature = (v, gamma = 1.0))]
fn p1_critical_g(v: f64, gamma: f64) -> f64 {
    meanfield::p1_critical_g(v, gamma)
}

/// Right-hand side of the Bloch equations at `state`.
#[pyfunction]
#[pyo3(signature = (state, v, g, p, gamma = 1.0))]
fn bloch_rhs(state: Triple, v: f64, g: f64, p: f64, gamma: f64) -> PyResult<Triple> {
    let f = meanfield::bloch_rhs(&BlochVector::new(state.0, state.1, state.2), &params(v, g, p, gamma, None)?);
    Ok((f[0], f[1], f[2]))
}

/// Jacobian of the Bloch equations as a row-major 3x3 list.
#[pyfunction]
#[pyo3(signature = (state, v, g, p, gamma = 1.0))]
fn jacobian(state: Triple, v: f64, g: f64, p: f64, gamma: f64) -> PyResult<Vec<Vec<f64>>> {
    let j = meanfield::jacobian(&BlochVector::new(state.0, state.1, state.2), &params(v, g, p, gamma, None)?);
    Ok((0..3).map(|i| (0..3).map(|k| j[(i, k)]).collect()).collect())
}

/// Fixed points with their Jacobian eigenvalues and stability.
#[pyfunction]
#[pyo3(signature = (v, g, p, gamma = 1.0, n_seeds = 200, seed = 0))]
fn find_fixed_points<'py>(
    py: Python<'py>,
    v: f64,
    g: f64,
    p: f64,
    gamma: f64,
    n_seeds: usize,
    seed: u64,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let m = params(v, g, p, gamma, None)?;
    meanfield::find_fixed_points(&m, n_seeds, seed)
        .into_iter()
        .map(|fp| {
            let d = PyDict::new(py);
            d.set_item("state", triple(fp.state))?;
            d.set_item("stability", fp.stability.as_str())?;
            d.set_item("eigenvalues", fp.jacobian_eigenvalues.to_vec())?;
            d.set_item("residual", fp.residual)?;
            Ok(d)
        })
        .collect()
}

/// Uniformly sampled trajectory: (times, [(X, Y, Z), ...]).
#[pyfunction]
#[pyo3(signature = (initial, v, g, p, t_end, gamma = 1.0, interval = 0.05, rel_tol = 1e-10, abs_tol = 1e-12))]
#[allow(clippy::too_many_arguments)]
fn integrate_trajectory(
    initial: Triple,
    v: f64,
    g: f64,
    p: f64,
    t_end: f64,
    gamma: f64,
    interval: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> PyResult<(Vec<f64>, Vec<Triple>)> {
    let m = params(v, g, p, gamma, None)?;
    let start = BlochVector::new(initial.0, initial.1, initial.2);
    let traj = meanfield::integrate_trajectory_sampled(&start, &m, t_end, rel_tol, abs_tol, interval).map_err(to_py)?;
    Ok((traj.times, traj.states.into_iter().map(triple).collect()))
}

/// Exact steady state of the N-spin master equation: magnetization, purity
/// and Dicke populations (ordered m = +N/2 ... -N/2).
#[pyfunction]
#[pyo3(signature = (v, g, p, n, gamma = 1.0))]
fn steady_state<'py>(py: Python<'py>, v: f64, g: f64, p: f64, n: usize, gamma: f64) -> PyResult<Bound<'py, PyDict>> {
    let m = params(v, g, p, gamma, Some(n))?;
    let l = build_liouvillian(&m, DickeBasis::new(n).map_err(to_py)?).map_err(to_py)?;
    let ss = py.detach(|| steady_state_detailed(&l)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("magnetization", triple(magnetization(&ss.rho)))?;
    d.set_item("purity", ss.rho.purity())?;
    d.set_item("residual", ss.residual)?;
    d.set_item("populations", (0..ss.rho.dim()).map(|i| ss.rho.matrix()[(i, i)].re).collect::<Vec<f64>>())?;
    Ok(d)
}

/// Liouvillian gap and the eigenvalues nearest zero.
#[pyfunction]
#[pyo3(signature = (v, g, p, n, gamma = 1.0, method = "auto"))]
fn liouvillian_gap<'py>(
    py: Python<'py>,
    v: f64,
    g: f64,
    p: f64,
    n: usize,
    gamma: f64,
    method: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let method = match method {
        "auto" => GapMethod::Auto,
        "dense" => GapMethod::Dense,
        "iterative" => GapMethod::Iterative,
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}; use auto, dense or iterative"))),
    };
    let m = params(v, g, p, gamma, Some(n))?;
    let l = build_liouvillian(&m, DickeBasis::new(n).map_err(to_py)?).map_err(to_py)?;
    let res = py.detach(|| liouvillian_gap_with(&l, method, &SpectralOptions::default())).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("gap", res.gap)?;
    d.set_item("eigenvalues", res.eigenvalues.clone() as Vec<Complex64>)?;
    d.set_item("zero_multiplicity", res.zero_multiplicity)?;
    d.set_item("warning", res.warning.clone())?;
    d.set_item("magnetization", triple(magnetization(&res.steady_state)))?;
    Ok(d)
}

/// Runs a config file (TOML or metadata.json) like the command-line tool and
/// returns the written file paths.
#[pyfunction]
#[pyo3(signature = (config, output_dir, workers = None))]
fn run_config(py: Python<'_>, config: PathBuf, output_dir: PathBuf, workers: Option<usize>) -> PyResult<Vec<PathBuf>> {
    use dicke_phase::cli;
    let args = cli::Args { config, workers, output_dir: Some(output_dir) };
    let report = py
        .detach(|| cli::prepare(&args).and_then(|(cfg, dir)| cli::run_config(cfg, &dir)))
        .map_err(|e| match e {
            cli::CliError::Config(m) => PyValueError::new_err(m),
            cli::CliError::Io(m) => pyo3::exceptions::PyOSError::new_err(m),
            cli::CliError::Solver(s) => PyRuntimeError::new_err(s.to_string()),
        })?;
    Ok(report.files)
}

#[pymodule]
#[pyo3(name = "dicke_phase")]
fn dicke_phase_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(analytic_p1, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_p0, m)?)?;
    m.add_function(wrap_pyfunction!(p0_critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(p1_critical_g, m)?)?;
    m.add_function(wrap_pyfunction!(bloch_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(find_fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(integrate_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(steady_state, m)?)?;
    m.add_function(wrap_pyfunction!(liouvillian_gap, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
