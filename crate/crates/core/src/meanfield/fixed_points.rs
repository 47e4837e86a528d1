//! Multi-start Newton search for fixed points of the Bloch equations and
//! their linear stability.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{bloch_rhs, jacobian, rhs_norm, BlochVector, ModelParams};
use crate::error::{Error, Result};

/// Largest accepted `max |f|` at a root.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Roots closer than this (Euclidean) are merged.
pub const DEDUP_DISTANCE: f64 = 1e-6;
/// Eigenvalues with `|Re| <= STABILITY_TOLERANCE` make a point marginal.
pub const STABILITY_TOLERANCE: f64 = 1e-9;
/// Roots whose squared norm differs from 1 by more than this are off the
/// physical sphere (only possible when `Z = 0`).
const SPHERE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Marginal,
    Unstable,
}

impl Stability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Stability::Stable => "stable",
            Stability::Marginal => "marginal",
            Stability::Unstable => "unstable",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub state: BlochVector,
    /// Sorted by descending real part.
    pub jacobian_eigenvalues: [Complex64; 3],
    pub stability: Stability,
    /// `max |f|` at `state`.
    pub residual: f64,
}

impl FixedPoint {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }

    pub fn max_real_part(&self) -> f64 {
        self.jacobian_eigenvalues[0].re
    }
}

/// Evaluates the Jacobian spectrum at a root of the Bloch equations.
pub fn classify_stability(state: &BlochVector, params: &ModelParams) -> Result<FixedPoint> {
    let residual = rhs_norm(state, params);
    if !(residual < ROOT_TOLERANCE) {
        return Err(Error::NotAFixedPoint { residual, tolerance: ROOT_TOLERANCE });
    }
    let ev = jacobian(state, params).complex_eigenvalues();
    let mut eigenvalues = [ev[0], ev[1], ev[2]];
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let max_re = eigenvalues[0].re;
    let stability = if max_re < -STABILITY_TOLERANCE {
        Stability::Stable
    } else if max_re <= STABILITY_TOLERANCE {
        Stability::Marginal
    } else {
        Stability::Unstable
    };
    Ok(FixedPoint { state: *state, jacobian_eigenvalues: eigenvalues, stability, residual })
}

/// Quasi-uniform starting points on the unit sphere: a Fibonacci lattice
/// under a random rotation drawn from `rng_seed`.
pub fn seed_points(n: usize, rng_seed: u64) -> Vec<BlochVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (u1, u2, u3): (f64, f64, f64) = (rng.random(), rng.random(), rng.random());
    let tau = std::f64::consts::TAU;
    let q = Quaternion::new(
        u1.sqrt() * (tau * u3).cos(),
        (1.0 - u1).sqrt() * (tau * u2).sin(),
        (1.0 - u1).sqrt() * (tau * u2).cos(),
        u1.sqrt() * (tau * u3).sin(),
    );
    let rot = UnitQuaternion::from_quaternion(q);
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            let v = rot * Vector3::new(r * phi.cos(), r * phi.sin(), z);
            BlochVector::new(v.x, v.y, v.z)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct FixedPointSearch {
    pub n_seeds: usize,
    pub rng_seed: u64,
    pub max_iterations: usize,
}

impl FixedPointSearch {
    pub fn new(n_seeds: usize, rng_seed: u64) -> Self {
        FixedPointSearch { n_seeds: n_seeds.max(1), rng_seed, max_iterations: 200 }
    }

    pub fn run(&self, params: &ModelParams) -> Vec<FixedPoint> {
        let mut roots: Vec<(BlochVector, f64)> = Vec::new();
        for seed in seed_points(self.n_seeds, self.rng_seed) {
            let Some(root) = newton(seed, params, self.max_iterations) else {
                continue;
            };
            if (root.norm_sq() - 1.0).abs() > SPHERE_TOLERANCE {
                continue;
            }
            let residual = rhs_norm(&root, params);
            match roots.iter_mut().find(|(r, _)| r.distance(&root) < DEDUP_DISTANCE) {
                Some(existing) => {
                    if residual < existing.1 {
                        *existing = (root, residual);
                    }
                }
                None => roots.push((root, residual)),
            }
        }
        let mut points: Vec<FixedPoint> =
            roots.iter().filter_map(|(r, _)| classify_stability(r, params).ok()).collect();
        points.sort_by(|a, b| {
            a.state
                .z
                .total_cmp(&b.state.z)
                .then(a.state.x.total_cmp(&b.state.x))
                .then(a.state.y.total_cmp(&b.state.y))
        });
        points
    }
}

/// Damped Newton search from `n_seeds` sphere points; roots are deduplicated,
/// restricted to the unit sphere and classified.
pub fn find_fixed_points(params: &ModelParams, n_seeds: usize, rng_seed: u64) -> Vec<FixedPoint> {
    FixedPointSearch::new(n_seeds, rng_seed).run(params)
}

fn sum_sq(f: &[f64; 3]) -> f64 {
    f.iter().map(|c| c * c).sum()
}

fn newton_step(state: &BlochVector, f: &[f64; 3], params: &ModelParams) -> Option<Vector3<f64>> {
    let jac = jacobian(state, params);
    let rhs = -Vector3::new(f[0], f[1], f[2]);
    if let Some(step) = jac.lu().solve(&rhs) {
        if step.iter().all(|c| c.is_finite()) {
            return Some(step);
        }
    }
    // Levenberg-Marquardt fallback at singular Jacobians
    let jt = jac.transpose();
    let normal = jt * jac;
    let mu = 1e-8 * normal.norm().max(1.0);
    (normal + Matrix3::identity() * mu).lu().solve(&(jt * rhs))
}

fn newton(seed: BlochVector, params: &ModelParams, max_iterations: usize) -> Option<BlochVector> {
    let mut s = seed;
    let mut f = bloch_rhs(&s, params);
    let mut phi = sum_sq(&f);
    for _ in 0..max_iterations {
        if phi.sqrt() < 1e-15 {
            break;
        }
        let step = newton_step(&s, &f, params)?;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-8 {
            let trial = BlochVector::new(s.x + lambda * step.x, s.y + lambda * step.y, s.z + lambda * step.z);
            let ft = bloch_rhs(&trial, params);
            let phi_t = sum_sq(&ft);
            if phi_t.is_finite() && phi_t <= (1.0 - 1e-4 * lambda) * phi {
                s = trial;
                f = ft;
                phi = phi_t;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted || s.norm_sq() > 100.0 {
            break;
        }
    }
    (rhs_norm(&s, params) < ROOT_TOLERANCE).then_some(s)
}
