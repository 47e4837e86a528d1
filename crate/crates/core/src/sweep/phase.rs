use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_pool, GridSpec};
use crate::collective::DickeBasis;
use crate::error::{Error, Result};
use crate::liouville::{
    build_liouvillian, liouvillian_gap_with, magnetization, steady_state, GapMethod, SpectralOptions, ITERATIVE_MAX_N,
};
use crate::meanfield::{
    detect_limit_cycle, find_fixed_points, integrate_trajectory_sampled, BlochVector,
    FixedPoint, LimitCycle,
};
use crate::params::{ModelParams, SweepParam};

/// Mean-field solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeanFieldOptions {
    /// Multi-start seeds for the fixed-point search.
    pub n_seeds: usize,
    pub rng_seed: u64,
    /// X-tilt of the south-pole start used by the branch-selection rule.
    pub tilt: f64,
    /// Integration chunk between capture checks.
    pub chunk_time: f64,
    /// Give up on capture by a stable point after this time.
    pub max_time: f64,
    /// Distance at which a trajectory counts as captured by a fixed point.
    pub capture_distance: f64,
    /// Post-transient window for limit-cycle detection and averaging.
    pub cycle_window: f64,
    pub sample_interval: f64,
}

impl Default for MeanFieldOptions {
    fn default() -> Self {
        MeanFieldOptions {
            n_seeds: 200,
            rng_seed: 0,
            tilt: 1e-6,
            chunk_time: 200.0,
            max_time: 2e4,
            capture_distance: 1e-3,
            cycle_window: 200.0,
            sample_interval: 0.05,
        }
    }
}

/// Quantum solver settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumOptions {
    #[serde(rename = "N")]
    pub n: usize,
    /// Also compute the Liouvillian gap.
    #[serde(default)]
    pub gap: bool,
    #[serde(default = "default_gap_method")]
    pub gap_method: GapMethod,
    #[serde(default)]
    pub spectral: SpectralOptions,
}

fn default_gap_method() -> GapMethod {
    GapMethod::Auto
}

impl QuantumOptions {
    pub fn new(n: usize) -> Self {
        QuantumOptions { n, gap: false, gap_method: GapMethod::Auto, spectral: SpectralOptions::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > ITERATIVE_MAX_N {
            return Err(Error::InvalidArgument(format!(
                "quantum sweeps need 1 <= N <= {ITERATIVE_MAX_N}, got N = {}",
                self.n
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Solver {
    MeanField(MeanFieldOptions),
    Quantum(QuantumOptions),
}

/// One row of a phase diagram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    /// Row-major grid index.
    pub index: usize,
    pub params: ModelParams,
    /// Stable fixed points (mean field only).
    pub stable_points: Vec<FixedPoint>,
    pub stable_count: usize,
    /// Branch-selection state (mean field) or steady-state magnetization (quantum).
    pub selected: BlochVector,
    pub selected_z: f64,
    /// The south-pole trajectory ends on a limit cycle (mean field only).
    pub limit_cycle: bool,
    pub gap: Option<f64>,
    pub zero_multiplicity: Option<usize>,
    /// Failure recorded for this point; numeric fields are NaN.
    pub error: Option<String>,
}

impl PhasePoint {
    fn failed(index: usize, params: ModelParams, err: Error) -> Self {
        let nan = BlochVector::new(f64::NAN, f64::NAN, f64::NAN);
        PhasePoint {
            index,
            params,
            stable_points: vec![],
            stable_count: 0,
            selected: nan,
            selected_z: f64::NAN,
            limit_cycle: false,
            gap: None,
            zero_multiplicity: None,
            error: Some(err.to_string()),
        }
    }
}

/// Result of the branch-selection rule.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSelection {
    /// The selected stable fixed point, or the time-averaged state on a
    /// limit cycle, or the last state reached.
    pub state: BlochVector,
    /// Index into the stable points when the trajectory was captured.
    pub fixed_point: Option<usize>,
    pub limit_cycle: Option<LimitCycle>,
}

fn nearest(stable: &[FixedPoint], s: &BlochVector) -> Option<(usize, f64)> {
    stable
        .iter()
        .enumerate()
        .map(|(i, fp)| (i, fp.state.distance(s)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn window_average(
    start: &BlochVector,
    params: &ModelParams,
    opts: &MeanFieldOptions,
) -> Result<(BlochVector, Option<LimitCycle>, BlochVector)> {
    // transient and analysis window of equal length
    let traj =
        integrate_trajectory_sampled(start, params, 2.0 * opts.cycle_window, 1e-10, 1e-12, opts.sample_interval)?;
    let cycle = detect_limit_cycle(&traj, 0.5).unwrap_or(None);
    let tail = &traj.states[traj.states.len() / 2..];
    let k = tail.len() as f64;
    let mean = BlochVector::new(
        tail.iter().map(|s| s.x).sum::<f64>() / k,
        tail.iter().map(|s| s.y).sum::<f64>() / k,
        tail.iter().map(|s| s.z).sum::<f64>() / k,
    );
    Ok((mean, cycle, traj.last()))
}

/// The stable fixed point reached from the south pole `(0, 0, -1)`.
///
/// If the pole itself is a stable fixed point it is selected. Otherwise the
/// trajectory from the pole tilted by `opts.tilt` towards +X is followed in
/// chunks until it comes within `capture_distance` of a stable point. With
/// no stable point, or without capture by `max_time`, the state averaged
/// over a post-transient window is reported together with any detected
/// limit cycle.
pub fn select_branch(params: &ModelParams, stable: &[FixedPoint], opts: &MeanFieldOptions) -> Result<BranchSelection> {
    let pole = BlochVector::SOUTH_POLE;
    if let Some((i, d)) = nearest(stable, &pole) {
        if d < 1e-9 {
            return Ok(BranchSelection { state: stable[i].state, fixed_point: Some(i), limit_cycle: None });
        }
    }
    let mut state = BlochVector::new(opts.tilt, 0.0, -1.0).normalized();
    if !stable.is_empty() {
        let mut t = 0.0;
        let mut previous_amplitude: Option<f64> = None;
        while t < opts.max_time {
            let chunk =
                integrate_trajectory_sampled(&state, params, opts.chunk_time, 1e-10, 1e-12, opts.sample_interval)?;
            state = chunk.last();
            t += opts.chunk_time;
            if let Some((i, d)) = nearest(stable, &state) {
                if d < opts.capture_distance {
                    return Ok(BranchSelection { state: stable[i].state, fixed_point: Some(i), limit_cycle: None });
                }
            }
            // Stop early on an orbit whose amplitude no longer changes
            // between chunks: the trajectory is not being captured.
            let amplitude = detect_limit_cycle(&chunk, 0.0).ok().flatten().map(|c| c.z_amplitude);
            match (previous_amplitude, amplitude) {
                (Some(a), Some(b)) if (a - b).abs() <= 1e-3 * b.max(1e-12) => break,
                _ => previous_amplitude = amplitude,
            }
        }
    }
    let (mean, cycle, last) = window_average(&state, params, opts)?;
    if cycle.is_some() {
        return Ok(BranchSelection { state: mean, fixed_point: None, limit_cycle: cycle });
    }
    match nearest(stable, &last) {
        Some((i, _)) => Ok(BranchSelection { state: stable[i].state, fixed_point: Some(i), limit_cycle: None }),
        None => Ok(BranchSelection { state: last, fixed_point: None, limit_cycle: None }),
    }
}

fn mean_field_point(index: usize, params: ModelParams, opts: &MeanFieldOptions) -> Result<PhasePoint> {
    params.validate()?;
    let stable: Vec<FixedPoint> =
        find_fixed_points(&params, opts.n_seeds, opts.rng_seed).into_iter().filter(|f| f.is_stable()).collect();
    let sel = select_branch(&params, &stable, opts)?;
    Ok(PhasePoint {
        index,
        params,
        stable_count: stable.len(),
        stable_points: stable,
        selected: sel.state,
        selected_z: sel.state.z,
        limit_cycle: sel.limit_cycle.is_some(),
        gap: None,
        zero_multiplicity: None,
        error: None,
    })
}

fn quantum_point(index: usize, params: ModelParams, opts: &QuantumOptions) -> Result<PhasePoint> {
    let params = params.with_n(opts.n);
    params.validate()?;
    let l = build_liouvillian(&params, DickeBasis::new(opts.n)?)?;
    let (rho, gap, zero_multiplicity) = if opts.gap {
        let res = liouvillian_gap_with(&l, opts.gap_method, &opts.spectral)?;
        (res.steady_state, Some(res.gap), Some(res.zero_multiplicity))
    } else {
        (steady_state(&l)?, None, None)
    };
    let m = magnetization(&rho);
    Ok(PhasePoint {
        index,
        params,
        stable_points: vec![],
        stable_count: 0,
        selected: m,
        selected_z: m.z,
        limit_cycle: false,
        gap,
        zero_multiplicity,
        error: None,
    })
}

/// Solves every grid point, in parallel over `workers` threads, and returns
/// the rows in row-major grid order.
pub fn phase_diagram(grid: &GridSpec, solver: &Solver, workers: usize) -> Result<Vec<PhasePoint>> {
    grid.validate()?;
    if let Solver::Quantum(q) = solver {
        q.validate()?;
    }
    let pool = build_pool(workers)?;
    let points = grid.points();
    Ok(pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, params)| {
                let res = match solver {
                    Solver::MeanField(o) => mean_field_point(i, *params, o),
                    Solver::Quantum(o) => quantum_point(i, *params, o),
                };
                res.unwrap_or_else(|e| PhasePoint::failed(i, *params, e))
            })
            .collect()
    }))
}

/// Stable-solution counts over a `(g, p)` grid at fixed `V`.
pub fn multistability_map(grid: &GridSpec, v: f64, workers: usize, opts: &MeanFieldOptions) -> Result<Vec<PhasePoint>> {
    let mut params: Vec<SweepParam> = grid.axes().iter().map(|a| a.param).collect();
    params.sort_by_key(|p| p.name());
    if params != [SweepParam::G, SweepParam::P] {
        return Err(Error::InvalidArgument("multistability map needs a two-dimensional (g, p) grid".into()));
    }
    let mut grid = grid.clone();
    grid.fixed.v = v;
    phase_diagram(&grid, &Solver::MeanField(opts.clone()), workers)
}
