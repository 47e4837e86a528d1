use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::check_basis;
use super::{build_liouvillian, magnetization, DensityMatrix, DirectLindblad, LiouvillianMatrix};
use crate::error::{Error, Result};
use crate::meanfield::BlochVector;
use crate::ode::{Dopri5, OdeSolution, Sampling};
use crate::params::ModelParams;

fn check_run(t_end: f64, tol: f64) -> Result<()> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if !(tol > 0.0 && tol <= 1e-3) {
        return Err(Error::InvalidArgument(format!("tol must lie in (0, 1e-3], got {tol}")));
    }
    Ok(())
}

fn interleave(rho: &DensityMatrix) -> Vec<f64> {
    rho.matrix().as_slice().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn deinterleave(d: usize, y: &[f64]) -> DMatrix<Complex64> {
    DMatrix::from_iterator(d, d, y.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])))
}

fn integrate(l: &LiouvillianMatrix, rho0: &DensityMatrix, t_end: f64, tol: f64, sampling: Sampling) -> Result<OdeSolution> {
    let m = l.matrix();
    Dopri5::new(tol, tol).integrate(|_t, y, dy| m.matvec_interleaved(y, dy), 0.0, &interleave(rho0), t_end, sampling)
}

/// Integrates `d rho / dt = unvec(L vec(rho))` from `rho0` for `t_end`
/// with the adaptive Dormand-Prince scheme (relative and absolute tolerance
/// `tol`).
pub fn evolve_rho(rho0: &DensityMatrix, params: &ModelParams, t_end: f64, tol: f64) -> Result<DensityMatrix> {
    check_run(t_end, tol)?;
    let l = build_liouvillian(params, rho0.basis())?;
    let sol = integrate(&l, rho0, t_end, tol, Sampling::Final)?;
    DensityMatrix::from_matrix_unchecked(rho0.basis(), deinterleave(rho0.dim(), sol.last().expect("final state")))
}

/// Like [`evolve_rho`], also recording the magnetization every `interval`.
pub fn evolve_rho_sampled(
    rho0: &DensityMatrix,
    params: &ModelParams,
    t_end: f64,
    tol: f64,
    interval: f64,
) -> Result<(DensityMatrix, Vec<(f64, BlochVector)>)> {
    check_run(t_end, tol)?;
    let l = build_liouvillian(params, rho0.basis())?;
    let sol = integrate(&l, rho0, t_end, tol, Sampling::Uniform(interval))?;
    let d = rho0.dim();
    let mut samples = Vec::with_capacity(sol.times.len());
    for (t, y) in sol.times.iter().zip(&sol.states) {
        let rho = DensityMatrix::from_matrix_unchecked(rho0.basis(), deinterleave(d, y))?;
        samples.push((*t, magnetization(&rho)));
    }
    let last = DensityMatrix::from_matrix_unchecked(rho0.basis(), deinterleave(d, sol.last().expect("final state")))?;
    Ok((last, samples))
}

/// Reference integrator using Eq. (2) by direct matrix products.
pub fn evolve_rho_direct(rho0: &DensityMatrix, params: &ModelParams, t_end: f64, tol: f64) -> Result<DensityMatrix> {
    check_run(t_end, tol)?;
    let basis = rho0.basis();
    let lind = DirectLindblad::new(params, basis)?;
    let d = basis.dim();
    let sol = Dopri5::new(tol, tol).integrate(
        |_t, y, dy| {
            let out = lind.apply(&deinterleave(d, y));
            for (k, z) in out.as_slice().iter().enumerate() {
                dy[2 * k] = z.re;
                dy[2 * k + 1] = z.im;
            }
        },
        0.0,
        &interleave(rho0),
        t_end,
        Sampling::Final,
    )?;
    DensityMatrix::from_matrix_unchecked(basis, deinterleave(d, sol.last().expect("final state")))
}

/// One segment of a parameter ramp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RampStep {
    pub params: ModelParams,
    /// Evolution time under `params`; zero leaves the state unchanged.
    pub window: f64,
}

/// Evolves through `schedule`, carrying the state between segments, and
/// records the magnetization at the end of each segment.
pub fn ramped_evolution(
    rho0: &DensityMatrix,
    schedule: &[RampStep],
    tol: f64,
) -> Result<Vec<(ModelParams, BlochVector)>> {
    let basis = rho0.basis();
    for step in schedule {
        check_basis(&step.params, basis)?;
        if !(step.window >= 0.0 && step.window.is_finite()) {
            return Err(Error::InvalidArgument(format!("ramp window must be non-negative, got {}", step.window)));
        }
    }
    let mut rho = rho0.clone();
    let mut out = Vec::with_capacity(schedule.len());
    for step in schedule {
        if step.window > 0.0 {
            rho = evolve_rho(&rho, &step.params, step.window, tol)?;
        }
        out.push((step.params, magnetization(&rho)));
    }
    Ok(out)
}
