use nalgebra::Matrix3;

use super::{BlochVector, ModelParams};

/// Time derivatives `(dX/dt, dY/dt, dZ/dt)` of the mean-field Bloch equations.
///
/// The dissipative coefficient is `gamma / 8`.
pub fn bloch_rhs(state: &BlochVector, params: &ModelParams) -> [f64; 3] {
    let BlochVector { x, y, z } = *state;
    let ModelParams { v, g, gamma, p, .. } = *params;
    let q = 1.0 - p;
    let k = gamma / 8.0;
    [
        -p * v / 2.0 * y * z - q * g * y + k * x * z,
        p * (v / 2.0 * x * z - g * z) + q * (g * x - v / 2.0 * x * z) + k * y * z,
        p * g * y + q * v / 2.0 * x * y - k * (1.0 - z * z),
    ]
}

/// Analytic Jacobian `M[a][b] = d f_a / d b` of [`bloch_rhs`].
pub fn jacobian(state: &BlochVector, params: &ModelParams) -> Matrix3<f64> {
    let BlochVector { x, y, z } = *state;
    let ModelParams { v, g, gamma, p, .. } = *params;
    let k = gamma / 8.0;
    let w = (2.0 * p - 1.0) / 2.0 * v;
    Matrix3::new(
        k * z,
        (p - 1.0) * g - p / 2.0 * v * z,
        -p / 2.0 * v * y + k * x,
        w * z + (1.0 - p) * g,
        k * z,
        w * x - p * g + k * y,
        (1.0 - p) / 2.0 * v * y,
        p * g + (1.0 - p) / 2.0 * v * x,
        gamma / 4.0 * z,
    )
}

/// Largest absolute component of the right-hand side.
pub fn rhs_norm(state: &BlochVector, params: &ModelParams) -> f64 {
    bloch_rhs(state, params).iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn north_pole_at_p1() {
        let f = bloch_rhs(&BlochVector::NORTH_POLE, &ModelParams::new(-5.0, 1.0, 1.0));
        assert_eq!(f, [0.0, -1.0, 0.0]);
    }

    #[test]
    fn south_pole_is_fixed_at_p0() {
        for (v, g) in [(-5.0, 1.0), (3.0, -2.0), (0.0, 7.5)] {
            let f = bloch_rhs(&BlochVector::SOUTH_POLE, &ModelParams::new(v, g, 0.0));
            assert!(f.iter().all(|c| *c == 0.0));
        }
    }

    #[test]
    fn north_pole_is_fixed_without_drive() {
        let f = bloch_rhs(&BlochVector::NORTH_POLE, &ModelParams::new(-5.0, 0.0, 0.0));
        assert!(f.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn jacobian_at_origin() {
        let params = ModelParams::new(-3.0, 1.7, 0.3);
        let m = jacobian(&BlochVector::new(0.0, 0.0, 0.0), &params);
        assert_eq!(m[(0, 0)], 0.0);
        assert_eq!(m[(2, 2)], 0.0);
        assert_eq!(m[(0, 1)], (0.3 - 1.0) * 1.7);
    }

    #[test]
    fn jacobian_at_south_pole_p0() {
        let m = jacobian(&BlochVector::SOUTH_POLE, &ModelParams::new(-5.0, 1.0, 0.0));
        assert_eq!(m[(0, 0)], -0.125);
        assert_eq!(m[(2, 2)], -0.25);
        assert_eq!(m[(0, 1)], -1.0);
        // d(dY/dt)/dX = (1-p) g + (2p-1)/2 V Z = 1 - 5/2
        assert_eq!(m[(1, 0)], -1.5);
    }
}
