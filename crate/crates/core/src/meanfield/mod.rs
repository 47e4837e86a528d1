//! Mean-field Bloch dynamics of the normalized magnetization `(X, Y, Z)`.

mod analytic;
mod bloch;
mod dynamics;
mod fixed_points;

use serde::{Deserialize, Serialize};

pub use crate::params::ModelParams;
pub use analytic::{analytic_p0, analytic_p1, p0_critical_points, p1_critical_g, P0Branch, P0Solution, CRITICAL_V_RATIO};
pub use bloch::{bloch_rhs, jacobian, rhs_norm};
pub use dynamics::{
    continuation_sweep_mf, detect_limit_cycle, integrate_trajectory, integrate_trajectory_sampled, ContinuationPoint,
    LimitCycle, Trajectory,
};
pub use fixed_points::{
    classify_stability, find_fixed_points, seed_points, FixedPoint, FixedPointSearch, Stability, DEDUP_DISTANCE,
    ROOT_TOLERANCE, STABILITY_TOLERANCE,
};

/// Normalized magnetization `<J>/(N/2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const SOUTH_POLE: BlochVector = BlochVector { x: 0.0, y: 0.0, z: -1.0 };
    pub const NORTH_POLE: BlochVector = BlochVector { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        BlochVector { x: a[0], y: a[1], z: a[2] }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        BlochVector { x: self.x / n, y: self.y / n, z: self.z / n }
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}
