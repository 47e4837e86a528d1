use serde::Serialize;

use crate::error::{Error, Result};
use crate::meanfield::{p0_critical_points, p1_critical_g, CRITICAL_V_RATIO};

/// Analytic phase boundaries at one interaction strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryRow {
    #[serde(rename = "V")]
    pub v: f64,
    /// `sqrt(16 V^2 + gamma^2) / 8`; the p = 1 boundary is at `g = +/- gc_p1`.
    pub gc_p1: f64,
    /// Signed `g_+^c` of the p = 0 FM window; NaN where `4 V^2 < gamma^2`.
    pub gplus_c: f64,
    pub gminus_c: f64,
    pub gplus_c_abs: f64,
    pub gminus_c_abs: f64,
    /// `V^c = -gamma / 2`.
    pub v_c: f64,
}

/// Tabulates the boundaries at `count` evenly spaced `V` in `[v_min, v_max]`
/// (a single row when `count == 1` and `v_min == v_max`).
pub fn analytic_boundaries(v_min: f64, v_max: f64, count: usize, gamma: f64) -> Result<Vec<BoundaryRow>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got gamma = {gamma}")));
    }
    if count == 0 || !(v_min <= v_max) || (count == 1 && v_min != v_max) || (count > 1 && v_min == v_max) {
        return Err(Error::InvalidArgument(format!(
            "V range [{v_min}, {v_max}] with {count} points is not a valid grid"
        )));
    }
    Ok((0..count)
        .map(|i| {
            let v = if count == 1 || i == count - 1 {
                v_max
            } else {
                v_min + i as f64 * (v_max - v_min) / (count - 1) as f64
            };
            let (gp, gm) = p0_critical_points(v, gamma).unwrap_or((f64::NAN, f64::NAN));
            BoundaryRow {
                v,
                gc_p1: p1_critical_g(v, gamma),
                gplus_c: gp,
                gminus_c: gm,
                gplus_c_abs: gp.abs(),
                gminus_c_abs: gm.abs(),
                v_c: CRITICAL_V_RATIO * gamma,
            }
        })
        .collect())
}
