//! Parameter-grid scans, multistability maps, analytic boundaries and
//! hysteresis experiments.
//!
//! Grid points are independent tasks run on a dedicated thread pool; the
//! output is always in row-major grid order, so results do not depend on
//! the worker count. A failing point is recorded in its row and never
//! aborts the sweep.

mod boundaries;
mod hysteresis;
mod phase;

pub use boundaries::{analytic_boundaries, BoundaryRow};
pub use hysteresis::{
    bistable_intervals, hysteresis_experiment, BranchPoint, Direction, HysteresisResult, HysteresisSolver,
    HysteresisSpec, DEFAULT_THRESHOLD,
};
pub use phase::{
    multistability_map, phase_diagram, select_branch, BranchSelection, MeanFieldOptions, PhasePoint,
    QuantumOptions, Solver,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ModelParams, SweepParam};

/// One scanned parameter: `count` evenly spaced values from `min` to `max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(param: SweepParam, min: f64, max: f64, count: usize) -> Self {
        Axis { param, min, max, count }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidArgument(format!("axis {}: count must be at least 2, got {}", self.param, self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::InvalidArgument(format!(
                "axis {}: min must be less than max, got [{}, {}]",
                self.param, self.min, self.max
            )));
        }
        if self.param == SweepParam::P && (self.min < 0.0 || self.max > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "axis p: range [{}, {}] leaves 0 <= p <= 1",
                self.min, self.max
            )));
        }
        Ok(())
    }

    /// Grid values; the endpoints are exact.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == last {
                    self.max
                } else {
                    self.min + i as f64 * (self.max - self.min) / last as f64
                }
            })
            .collect()
    }
}

/// A one- or two-dimensional parameter grid. Parameters not scanned are
/// taken from `fixed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub axis1: Axis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<Axis>,
    pub fixed: ModelParams,
}

impl GridSpec {
    pub fn new(axis1: Axis, axis2: Option<Axis>, fixed: ModelParams) -> Self {
        GridSpec { axis1, axis2, fixed }
    }

    pub fn validate(&self) -> Result<()> {
        self.axis1.validate()?;
        if let Some(a2) = &self.axis2 {
            a2.validate()?;
            if a2.param == self.axis1.param {
                return Err(Error::InvalidArgument(format!("grid axes must be distinct, both are {}", a2.param)));
            }
        }
        // scanned fields are overwritten; check the rest
        let mut probe = self.fixed;
        for axis in self.axes() {
            probe = probe.with(axis.param, axis.min);
        }
        probe.validate()
    }

    pub fn axes(&self) -> Vec<Axis> {
        std::iter::once(self.axis1).chain(self.axis2).collect()
    }

    /// `(rows, cols)`; `cols` is 1 for a one-dimensional grid.
    pub fn shape(&self) -> (usize, usize) {
        (self.axis1.count, self.axis2.map_or(1, |a| a.count))
    }

    pub fn len(&self) -> usize {
        let (r, c) = self.shape();
        r * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Parameters in row-major order (axis1 outer, axis2 inner).
    pub fn points(&self) -> Vec<ModelParams> {
        let v1 = self.axis1.values();
        let v2 = self.axis2.map(|a| a.values());
        let mut out = Vec::with_capacity(self.len());
        for a in &v1 {
            let base = self.fixed.with(self.axis1.param, *a);
            match (&self.axis2, &v2) {
                (Some(ax2), Some(vals)) => out.extend(vals.iter().map(|b| base.with(ax2.param, *b))),
                _ => out.push(base),
            }
        }
        out
    }
}

pub(crate) fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}
