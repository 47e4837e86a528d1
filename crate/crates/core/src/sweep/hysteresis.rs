use serde::{Deserialize, Serialize};

use super::build_pool;
use crate::collective::DickeBasis;
use crate::error::{Error, Result};
use crate::liouville::{ramped_evolution, DensityMatrix, RampStep, ITERATIVE_MAX_N};
use crate::meanfield::{continuation_sweep_mf, BlochVector};
use crate::params::{ModelParams, SweepParam};

/// Default `|Delta Z|` above which the two branches count as distinct.
pub const DEFAULT_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Up,
    Down,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HysteresisSolver {
    /// Mean-field continuation, integrating `settle_time` at each p.
    MeanField {
        #[serde(default = "default_settle")]
        settle_time: f64,
    },
    /// Finite-N ramp, evolving the density matrix for `window` at each p.
    Quantum {
        #[serde(rename = "N")]
        n: usize,
        #[serde(default = "default_window")]
        window: f64,
        #[serde(default = "default_tol")]
        tol: f64,
    },
}

fn default_settle() -> f64 {
    200.0
}

fn default_window() -> f64 {
    50.0
}

fn default_tol() -> f64 {
    1e-8
}

/// A sweep of `p` over `p_count` evenly spaced values in `[p_min, p_max]`
/// with the other parameters from `base`. Every direction starts from
/// `initial` (the south pole by default; a spin coherent state for the
/// quantum solver).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HysteresisSpec {
    pub base: ModelParams,
    pub p_min: f64,
    pub p_max: f64,
    pub p_count: usize,
    pub direction: Direction,
    pub solver: HysteresisSolver,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_initial")]
    pub initial: BlochVector,
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

fn default_initial() -> BlochVector {
    BlochVector::SOUTH_POLE
}

impl HysteresisSpec {
    pub fn new(base: ModelParams, p_min: f64, p_max: f64, p_count: usize, direction: Direction, solver: HysteresisSolver) -> Self {
        HysteresisSpec {
            base,
            p_min,
            p_max,
            p_count,
            direction,
            solver,
            threshold: DEFAULT_THRESHOLD,
            initial: BlochVector::SOUTH_POLE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0 <= self.p_min && self.p_min <= self.p_max && self.p_max <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "p range must satisfy 0 <= p_min <= p_max <= 1, got [{}, {}]",
                self.p_min, self.p_max
            )));
        }
        if self.p_count == 0 || (self.p_count == 1) != (self.p_min == self.p_max) {
            return Err(Error::InvalidArgument(format!(
                "p_count = {} does not fit the range [{}, {}]",
                self.p_count, self.p_min, self.p_max
            )));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidArgument(format!("threshold must be positive, got {}", self.threshold)));
        }
        if !(self.initial.norm() > 0.0 && self.initial.is_finite()) {
            return Err(Error::InvalidArgument("initial state must be a nonzero finite vector".into()));
        }
        self.base.with(SweepParam::P, self.p_min).validate()?;
        match self.solver {
            HysteresisSolver::MeanField { settle_time } if !(settle_time > 0.0) => {
                Err(Error::InvalidArgument(format!("settle_time must be positive, got {settle_time}")))
            }
            HysteresisSolver::Quantum { n, .. } if n == 0 || n > ITERATIVE_MAX_N => Err(Error::InvalidArgument(
                format!("quantum hysteresis needs 1 <= N <= {ITERATIVE_MAX_N}, got N = {n}"),
            )),
            HysteresisSolver::Quantum { window, .. } if !(window >= 0.0) => {
                Err(Error::InvalidArgument(format!("window must be non-negative, got {window}")))
            }
            _ => Ok(()),
        }
    }

    /// Ascending p grid.
    pub fn p_values(&self) -> Vec<f64> {
        if self.p_count == 1 {
            return vec![self.p_min];
        }
        let last = self.p_count - 1;
        (0..self.p_count)
            .map(|i| if i == last { self.p_max } else { self.p_min + i as f64 * (self.p_max - self.p_min) / last as f64 })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BranchPoint {
    pub p: f64,
    pub state: BlochVector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HysteresisResult {
    /// Ascending p grid.
    pub p_values: Vec<f64>,
    /// Branch in sweep order (ascending p).
    pub up: Option<Vec<BranchPoint>>,
    /// Branch in sweep order (descending p).
    pub down: Option<Vec<BranchPoint>>,
    /// Maximal runs of consecutive grid points where `|Z_up - Z_down| > threshold`.
    pub intervals: Vec<(f64, f64)>,
    pub threshold: f64,
}

impl HysteresisResult {
    /// Smallest interval covering every run, if any.
    pub fn bistable_interval(&self) -> Option<(f64, f64)> {
        let lo = self.intervals.iter().map(|i| i.0).fold(f64::INFINITY, f64::min);
        let hi = self.intervals.iter().map(|i| i.1).fold(f64::NEG_INFINITY, f64::max);
        (lo <= hi).then_some((lo, hi))
    }
}

/// Runs of grid points where two branches, both listed in ascending p order,
/// differ in `Z` by more than `threshold`.
pub fn bistable_intervals(p_values: &[f64], z_up: &[f64], z_down: &[f64], threshold: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for i in 0..p_values.len() {
        let split = (z_up[i] - z_down[i]).abs() > threshold;
        match (split, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((p_values[s], p_values[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((p_values[s], p_values[p_values.len() - 1]));
    }
    out
}

fn run_branch(spec: &HysteresisSpec, ps: &[f64]) -> Result<Vec<BranchPoint>> {
    let path: Vec<ModelParams> = ps.iter().map(|p| spec.base.with(SweepParam::P, *p)).collect();
    match spec.solver {
        HysteresisSolver::MeanField { settle_time } => {
            let pts = continuation_sweep_mf(&path, &spec.initial.normalized(), settle_time)?;
            Ok(pts.iter().map(|c| BranchPoint { p: c.params.p, state: c.state }).collect())
        }
        HysteresisSolver::Quantum { n, window, tol } => {
            let basis = DickeBasis::new(n)?;
            let rho0 = if spec.initial == BlochVector::SOUTH_POLE {
                DensityMatrix::ground(basis)
            } else {
                DensityMatrix::coherent(basis, &spec.initial)?
            };
            let schedule: Vec<RampStep> = path.iter().map(|p| RampStep { params: p.with_n(n), window }).collect();
            let out = ramped_evolution(&rho0, &schedule, tol)?;
            Ok(out.iter().map(|(p, m)| BranchPoint { p: p.p, state: *m }).collect())
        }
    }
}

/// Up and/or down sweeps of `p`; with both directions the bistable
/// intervals are reported. The two directions run concurrently when
/// `workers > 1`.
pub fn hysteresis_experiment(spec: &HysteresisSpec, workers: usize) -> Result<HysteresisResult> {
    spec.validate()?;
    let p_values = spec.p_values();
    let descending: Vec<f64> = p_values.iter().rev().copied().collect();
    let want_up = matches!(spec.direction, Direction::Up | Direction::Both);
    let want_down = matches!(spec.direction, Direction::Down | Direction::Both);
    let pool = build_pool(workers)?;
    let (up, down) = pool.install(|| {
        rayon::join(
            || want_up.then(|| run_branch(spec, &p_values)).transpose(),
            || want_down.then(|| run_branch(spec, &descending)).transpose(),
        )
    });
    let (up, down) = (up?, down?);
    let intervals = match (&up, &down) {
        (Some(u), Some(d)) => {
            let zu: Vec<f64> = u.iter().map(|b| b.state.z).collect();
            let zd: Vec<f64> = d.iter().rev().map(|b| b.state.z).collect();
            bistable_intervals(&p_values, &zu, &zd, spec.threshold)
        }
        _ => vec![],
    };
    Ok(HysteresisResult { p_values, up, down, intervals, threshold: spec.threshold })
}
