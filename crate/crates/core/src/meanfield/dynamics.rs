//! Time integration of the Bloch equations, limit-cycle detection and
//! parameter continuation.

use serde::{Deserialize, Serialize};

use super::{bloch_rhs, rhs_norm, BlochVector, ModelParams};
use crate::error::{Error, Result};
use crate::ode::{Dopri5, Sampling};

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
    pub params: ModelParams,
}

impl Trajectory {
    pub fn last(&self) -> BlochVector {
        *self.states.last().expect("trajectory holds the initial state")
    }

    /// Largest `|X^2 + Y^2 + Z^2 - 1|` along the trajectory.
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm_sq() - 1.0).abs()).fold(0.0, f64::max)
    }
}

fn check_tolerances(t_end: f64, rel_tol: f64, abs_tol: f64) -> Result<()> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    for (name, tol) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
        if !(tol > 0.0 && tol <= 1e-3) {
            return Err(Error::InvalidArgument(format!("{name} must lie in (0, 1e-3], got {tol}")));
        }
    }
    Ok(())
}

fn run(
    initial: &BlochVector,
    params: &ModelParams,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    sampling: Sampling,
) -> Result<Trajectory> {
    check_tolerances(t_end, rel_tol, abs_tol)?;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let f = bloch_rhs(&BlochVector::new(y[0], y[1], y[2]), params);
        dy.copy_from_slice(&f);
    };
    let sol = Dopri5::new(rel_tol, abs_tol).integrate(rhs, 0.0, &initial.to_array(), t_end, sampling)?;
    Ok(Trajectory {
        times: sol.times,
        states: sol.states.iter().map(|s| BlochVector::new(s[0], s[1], s[2])).collect(),
        params: *params,
    })
}

/// Integrates from `t = 0` to `t_end`, recording every accepted step.
pub fn integrate_trajectory(
    initial: &BlochVector,
    params: &ModelParams,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Trajectory> {
    run(initial, params, t_end, rel_tol, abs_tol, Sampling::Steps)
}

/// Like [`integrate_trajectory`] but samples uniformly every `interval`.
pub fn integrate_trajectory_sampled(
    initial: &BlochVector,
    params: &ModelParams,
    t_end: f64,
    rel_tol: f64,
    abs_tol: f64,
    interval: f64,
) -> Result<Trajectory> {
    run(initial, params, t_end, rel_tol, abs_tol, Sampling::Uniform(interval))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCycle {
    pub period: f64,
    /// Peak-to-trough amplitude of `Z`.
    pub z_amplitude: f64,
    pub z_mean: f64,
}

/// Vertex of the parabola through three samples around a local extremum.
fn refine_extremum(t: [f64; 3], z: [f64; 3]) -> (f64, f64) {
    // Newton form: z0 + d1 (s - t0) + a (s - t0)(s - t1)
    let d1 = (z[1] - z[0]) / (t[1] - t[0]);
    let d2 = (z[2] - z[1]) / (t[2] - t[1]);
    let a = (d2 - d1) / (t[2] - t[0]);
    if a == 0.0 {
        return (t[1], z[1]);
    }
    let tv = (0.5 * (t[0] + t[1]) - d1 / (2.0 * a)).clamp(t[0], t[2]);
    (tv, z[0] + d1 * (tv - t[0]) + a * (tv - t[0]) * (tv - t[1]))
}

/// Detects a periodic `Z(t)` after discarding the first `transient_fraction`
/// of the trajectory.
///
/// Returns `None` when `Z` settles (total variation below `1e-6`), does not
/// oscillate, or oscillates irregularly or with a drifting amplitude.
pub fn detect_limit_cycle(traj: &Trajectory, transient_fraction: f64) -> Result<Option<LimitCycle>> {
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::InvalidArgument(format!(
            "transient_fraction must lie in [0, 1), got {transient_fraction}"
        )));
    }
    let (Some(&t0), Some(&t1)) = (traj.times.first(), traj.times.last()) else {
        return Err(Error::InsufficientData("empty trajectory".into()));
    };
    let cut = t0 + transient_fraction * (t1 - t0);
    let start = traj.times.partition_point(|&t| t < cut);
    let times = &traj.times[start..];
    let z: Vec<f64> = traj.states[start..].iter().map(|s| s.z).collect();
    if z.len() < 8 {
        return Err(Error::InsufficientData(format!(
            "post-transient window holds {} samples, need at least 8",
            z.len()
        )));
    }
    let variation: f64 = z.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    if variation < 1e-6 {
        return Ok(None);
    }

    let mut peaks = Vec::new();
    for i in 1..z.len() - 1 {
        if z[i] > z[i - 1] && z[i] >= z[i + 1] {
            peaks.push(refine_extremum([times[i - 1], times[i], times[i + 1]], [z[i - 1], z[i], z[i + 1]]));
        }
    }
    if peaks.len() < 2 {
        return Ok(None);
    }
    if peaks.len() < 6 {
        return Err(Error::InsufficientData(format!(
            "post-transient window holds {} maxima, need at least 6",
            peaks.len()
        )));
    }
    let spacings: Vec<f64> = peaks.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let var = spacings.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / spacings.len() as f64;
    let cv = var.sqrt() / mean;

    let z_max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let z_min = z.iter().cloned().fold(f64::INFINITY, f64::min);
    let amplitude = z_max - z_min;
    let peak_hi = peaks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let peak_lo = peaks.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let drift = (peak_hi - peak_lo) / amplitude;

    if cv < 0.01 && drift < 0.01 {
        let z_mean = z.iter().sum::<f64>() / z.len() as f64;
        Ok(Some(LimitCycle { period: mean, z_amplitude: amplitude, z_mean }))
    } else {
        Ok(None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub params: ModelParams,
    pub state: BlochVector,
    /// `max |f| < 1e-8` at the recorded state.
    pub converged: bool,
    pub residual: f64,
}

/// Follows a branch along `path`: each point is integrated for `settle_time`
/// starting from the previous point's final state.
pub fn continuation_sweep_mf(
    path: &[ModelParams],
    initial: &BlochVector,
    settle_time: f64,
) -> Result<Vec<ContinuationPoint>> {
    if path.is_empty() {
        return Err(Error::InvalidArgument("continuation path is empty".into()));
    }
    if !(settle_time > 0.0) {
        return Err(Error::InvalidArgument(format!("settle_time must be positive, got {settle_time}")));
    }
    for w in path.windows(2) {
        let diff = w[0].differing(&w[1]);
        if diff.len() > 1 {
            return Err(Error::InvalidArgument(format!(
                "consecutive path entries differ in more than one parameter: {diff:?}"
            )));
        }
    }
    let mut state = *initial;
    let mut out = Vec::with_capacity(path.len());
    for params in path {
        params.validate()?;
        let traj = run(&state, params, settle_time, 1e-10, 1e-12, Sampling::Final)?;
        state = traj.last();
        let residual = rhs_norm(&state, params);
        out.push(ContinuationPoint { params: *params, state, converged: residual < 1e-8, residual });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::analytic_p1;

    #[test]
    fn fixed_point_trajectory_is_constant() {
        let params = ModelParams::new(-5.0, 1.3, 0.0);
        let traj = integrate_trajectory_sampled(&BlochVector::SOUTH_POLE, &params, 50.0, 1e-9, 1e-12, 0.5).unwrap();
        assert!(traj.states.iter().all(|s| *s == BlochVector::SOUTH_POLE));
        assert_eq!(detect_limit_cycle(&traj, 0.5).unwrap(), None);
    }

    #[test]
    fn norm_is_conserved_on_the_sphere() {
        let params = ModelParams::new(-5.0, 3.0, 1.0);
        let traj = integrate_trajectory(&BlochVector::NORTH_POLE, &params, 100.0, 1e-11, 1e-13).unwrap();
        assert!(traj.max_norm_drift() < 1e-8, "{}", traj.max_norm_drift());
        assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn unstable_region_oscillates() {
        let params = ModelParams::new(-5.0, 3.0, 1.0);
        let traj =
            integrate_trajectory_sampled(&BlochVector::NORTH_POLE, &params, 200.0, 1e-11, 1e-13, 0.01).unwrap();
        let cycle = detect_limit_cycle(&traj, 0.5).unwrap().expect("limit cycle");
        assert!(cycle.period > 0.0 && cycle.period.is_finite());
        assert!(cycle.z_amplitude > 0.01);
    }

    #[test]
    fn spiral_into_stable_point_is_not_a_cycle() {
        let params = ModelParams::new(-5.0, 1.0, 1.0);
        let traj = integrate_trajectory_sampled(&BlochVector::new(0.1, 0.1, -0.99).normalized(), &params, 400.0, 1e-11, 1e-13, 0.05)
            .unwrap();
        assert_eq!(detect_limit_cycle(&traj, 0.5).unwrap(), None);
        let exact = analytic_p1(&params).unwrap().unwrap();
        assert!(traj.last().distance(&exact) < 1e-6);
    }

    #[test]
    fn short_window_is_an_error() {
        let params = ModelParams::new(-5.0, 3.0, 1.0);
        let traj = integrate_trajectory_sampled(&BlochVector::NORTH_POLE, &params, 0.05, 1e-9, 1e-12, 0.01).unwrap();
        assert!(matches!(detect_limit_cycle(&traj, 0.5), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn rejects_bad_tolerances() {
        let params = ModelParams::new(-5.0, 3.0, 1.0);
        assert!(integrate_trajectory(&BlochVector::NORTH_POLE, &params, 1.0, 1e-2, 1e-9).is_err());
        assert!(integrate_trajectory(&BlochVector::NORTH_POLE, &params, 0.0, 1e-6, 1e-9).is_err());
    }

    #[test]
    fn continuation_rejects_empty_path() {
        assert!(continuation_sweep_mf(&[], &BlochVector::SOUTH_POLE, 10.0).is_err());
    }

    #[test]
    fn single_point_continuation_reaches_steady_state() {
        let params = ModelParams::new(-5.0, 1.0, 1.0);
        let branch = continuation_sweep_mf(&[params], &BlochVector::SOUTH_POLE, 200.0).unwrap();
        assert_eq!(branch.len(), 1);
        assert!(branch[0].converged);
        let exact = analytic_p1(&params).unwrap().unwrap();
        assert!(branch[0].state.distance(&exact) < 1e-6);
    }

    #[test]
    fn continuation_rejects_two_parameter_jumps() {
        let a = ModelParams::new(-5.0, 1.0, 1.0);
        let b = ModelParams::new(-4.0, 2.0, 1.0);
        assert!(continuation_sweep_mf(&[a, b], &BlochVector::SOUTH_POLE, 10.0).is_err());
    }
}
