//! Closed-form steady states for the two limiting Hamiltonians.

use serde::{Deserialize, Serialize};

use super::{BlochVector, ModelParams};
use crate::error::{Error, Result};

/// `V^c / gamma`: below it the p = 0 ferromagnetic window opens.
pub const CRITICAL_V_RATIO: f64 = -0.5;

/// Stable steady state of the p = 1 model, or `None` in the region where the
/// closed form has no real solution (`64 g^2 > 16 V^2 + gamma^2`).
pub fn analytic_p1(params: &ModelParams) -> Result<Option<BlochVector>> {
    if params.p != 1.0 {
        return Err(Error::InvalidArgument(format!("analytic_p1 requires p = 1, got p = {}", params.p)));
    }
    let ModelParams { v, g, gamma, .. } = *params;
    let denom = 16.0 * v * v + gamma * gamma;
    let mut radicand = 1.0 - 64.0 * g * g / denom;
    if radicand < 0.0 {
        // rounding at the boundary itself |g| = g_c
        if radicand < -4.0 * f64::EPSILON {
            return Ok(None);
        }
        radicand = 0.0;
    }
    Ok(Some(BlochVector {
        x: 32.0 * g * v / denom,
        y: 8.0 * g * gamma / denom,
        z: -radicand.sqrt(),
    }))
}

/// `|g_c| = sqrt(16 V^2 + gamma^2) / 8`, the p = 1 boundary of the ordered phase.
pub fn p1_critical_g(v: f64, gamma: f64) -> f64 {
    (16.0 * v * v + gamma * gamma).sqrt() / 8.0
}

/// Signed critical drives `(g_+^c, g_-^c)` of the p = 0 model,
/// `g_{+/-}^c = gamma^2 / (8 (2V +/- sqrt(4V^2 - gamma^2)))`.
///
/// `None` when `4 V^2 < gamma^2`. Both expressions are evaluated in a
/// cancellation-free form.
pub fn p0_critical_points(v: f64, gamma: f64) -> Option<(f64, f64)> {
    let disc = 4.0 * v * v - gamma * gamma;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let minus = 2.0 * v - s;
    let plus = 2.0 * v + s;
    let g2 = gamma * gamma;
    // (2V + s)(2V - s) = gamma^2
    if v < 0.0 {
        Some((minus / 8.0, g2 / (8.0 * minus)))
    } else {
        Some((g2 / (8.0 * plus), plus / 8.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum P0Branch {
    /// Ordered solution built from `xi_{+/-}` and `eta_{+/-,+/-}`.
    Ordered { xi_plus: bool, eta_plus: bool },
    SouthPole,
    NorthPole,
}

impl P0Branch {
    pub fn label(&self) -> &'static str {
        match self {
            P0Branch::Ordered { xi_plus: true, eta_plus: true } => "+,+",
            P0Branch::Ordered { xi_plus: true, eta_plus: false } => "+,-",
            P0Branch::Ordered { xi_plus: false, eta_plus: true } => "-,+",
            P0Branch::Ordered { xi_plus: false, eta_plus: false } => "-,-",
            P0Branch::SouthPole => "south",
            P0Branch::NorthPole => "north",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct P0Solution {
    pub state: BlochVector,
    pub branch: P0Branch,
}

/// All real fixed points of the p = 0 model: `{eta, gamma eta xi, 8 g xi}`
/// for every real `xi_{+/-}` with a non-negative `eta` radicand, plus both poles.
pub fn analytic_p0(params: &ModelParams) -> Result<Vec<P0Solution>> {
    if params.p != 0.0 {
        return Err(Error::InvalidArgument(format!("analytic_p0 requires p = 0, got p = {}", params.p)));
    }
    let ModelParams { v, g, gamma, .. } = *params;
    let mut out = Vec::with_capacity(6);
    let disc = 4.0 * v * v - gamma * gamma;
    if disc >= 0.0 && v != 0.0 {
        let s = disc.sqrt();
        let g2 = gamma * gamma;
        // roots of gamma^2 xi^2 - 4 V xi + 1 = 0; their product is 1/gamma^2
        let (xi_plus, xi_minus) = if v < 0.0 {
            let xi_minus = (2.0 * v - s) / g2;
            (1.0 / (g2 * xi_minus), xi_minus)
        } else {
            let xi_plus = (2.0 * v + s) / g2;
            (xi_plus, 1.0 / (g2 * xi_plus))
        };
        for (xi_is_plus, xi) in [(true, xi_plus), (false, xi_minus)] {
            let radicand = 1.0 - (64.0 * g * g + g2) * xi / (4.0 * v);
            if radicand < 0.0 {
                continue;
            }
            let eta = radicand.sqrt();
            for (eta_is_plus, e) in [(true, eta), (false, -eta)] {
                out.push(P0Solution {
                    state: BlochVector { x: e, y: gamma * e * xi, z: 8.0 * g * xi },
                    branch: P0Branch::Ordered { xi_plus: xi_is_plus, eta_plus: eta_is_plus },
                });
            }
        }
    }
    out.push(P0Solution { state: BlochVector::SOUTH_POLE, branch: P0Branch::SouthPole });
    out.push(P0Solution { state: BlochVector::NORTH_POLE, branch: P0Branch::NorthPole });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::bloch_rhs;

    #[test]
    fn p1_reference_point() {
        let s = analytic_p1(&ModelParams::new(-5.0, 1.0, 1.0)).unwrap().unwrap();
        assert!((s.x - -0.399002493765586).abs() < 1e-12);
        assert!((s.y - 0.019950124688279).abs() < 1e-12);
        assert!((s.z - -0.916732786854362).abs() < 1e-12);
    }

    #[test]
    fn p1_undriven_is_fully_decayed() {
        for v in [-5.0, 0.0, 2.0] {
            let s = analytic_p1(&ModelParams::new(v, 0.0, 1.0)).unwrap().unwrap();
            assert_eq!(s.to_array(), [0.0, 0.0, -1.0]);
        }
    }

    #[test]
    fn p1_no_solution_in_unstable_region() {
        assert_eq!(analytic_p1(&ModelParams::new(-5.0, 3.0, 1.0)).unwrap(), None);
    }

    #[test]
    fn p1_requires_p_one() {
        assert!(analytic_p1(&ModelParams::new(-5.0, 1.0, 0.5)).is_err());
        assert!(analytic_p0(&ModelParams::new(-5.0, 1.0, 0.5)).is_err());
    }

    #[test]
    fn p0_xi_roots() {
        // xi = -10 +/- sqrt(99)
        let sols = analytic_p0(&ModelParams::new(-5.0, 0.001, 0.0)).unwrap();
        let xi_of = |b: P0Branch| {
            let s = sols.iter().find(|s| s.branch == b).unwrap().state;
            s.z / (8.0 * 0.001)
        };
        let xp = xi_of(P0Branch::Ordered { xi_plus: true, eta_plus: true });
        let xm = xi_of(P0Branch::Ordered { xi_plus: false, eta_plus: true });
        assert!((xp - (-10.0 + 99f64.sqrt())).abs() < 1e-10);
        assert!((xm - (-10.0 - 99f64.sqrt())).abs() < 1e-9);
    }

    #[test]
    fn p0_reference_branch() {
        let sols = analytic_p0(&ModelParams::new(-5.0, 1.0, 0.0)).unwrap();
        let s = sols
            .iter()
            .find(|s| s.branch == P0Branch::Ordered { xi_plus: true, eta_plus: true })
            .unwrap()
            .state;
        assert!((s.x - 0.91493).abs() < 5e-6);
        assert!((s.y - -0.045862).abs() < 1e-6);
        assert!((s.z - -0.40101).abs() < 5e-6);
        assert!((s.norm_sq() - 1.0).abs() < 1e-10);
        // the xi_- branch has a negative eta radicand at g = 1
        assert_eq!(sols.len(), 4);
    }

    #[test]
    fn p0_weak_interaction_only_poles() {
        let sols = analytic_p0(&ModelParams::new(-0.4, 1.0, 0.0)).unwrap();
        assert_eq!(sols.len(), 2);
        assert!(sols.iter().all(|s| matches!(s.branch, P0Branch::SouthPole | P0Branch::NorthPole)));
    }

    #[test]
    fn p0_candidates_are_roots() {
        for g in [0.003, 0.5, 2.0] {
            let params = ModelParams::new(-5.0, g, 0.0);
            for sol in analytic_p0(&params).unwrap() {
                let f = bloch_rhs(&sol.state, &params);
                assert!(f.iter().all(|c| c.abs() < 1e-12), "{:?} {:?}", sol, f);
            }
        }
    }

    #[test]
    fn critical_points_at_reference_interaction() {
        let (gp, gm) = p0_critical_points(-5.0, 1.0).unwrap();
        assert!((gp.abs() - 2.4937).abs() < 5e-5);
        assert!((gm.abs() - 0.0062657).abs() < 5e-8);
        assert!(gp < 0.0 && gm < 0.0);
        let (a, b) = p0_critical_points(-0.5, 1.0).unwrap();
        assert_eq!(a, b);
        assert!(p0_critical_points(-0.4, 1.0).is_none());
        assert_eq!(p1_critical_g(0.0, 1.0), 0.125);
        assert!((p1_critical_g(-5.0, 1.0) - 401f64.sqrt() / 8.0).abs() < 1e-15);
    }
}
