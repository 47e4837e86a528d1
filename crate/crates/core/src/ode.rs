//! Adaptive Dormand-Prince 5(4) integrator over flat `f64` state vectors.
//!
//! Complex-valued systems (vectorized density matrices) are integrated by
//! interleaving real and imaginary parts. Uniform sampling uses the
//! fourth-order continuous extension of the method.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Which states the integrator records.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Sampling {
    /// Every accepted step, plus the initial state.
    Steps,
    /// `t0, t0 + dt, t0 + 2 dt, ...` and the final time.
    Uniform(f64),
    /// Only the final state.
    Final,
}

#[derive(Clone, Debug, Default)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl OdeSolution {
    pub fn last(&self) -> Option<&[f64]> {
        self.states.last().map(|s| s.as_slice())
    }
}

#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Dopri5 { rel_tol, abs_tol, max_step: f64::INFINITY, max_steps: 50_000_000 }
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = max_step;
        self
    }

    fn error_norm(&self, y0: &[f64], y1: &[f64], err: &[f64]) -> f64 {
        let sum: f64 = y0
            .iter()
            .zip(y1)
            .zip(err)
            .map(|((a, b), e)| {
                let scale = self.abs_tol + self.rel_tol * a.abs().max(b.abs());
                (e / scale).powi(2)
            })
            .sum();
        (sum / y0.len().max(1) as f64).sqrt()
    }

    fn initial_step<F>(&self, rhs: &mut F, t0: f64, y0: &[f64], f0: &[f64], span: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y0.len().max(1) as f64;
        let scale = |y: f64| self.abs_tol + self.rel_tol * y.abs();
        let d0 = (y0.iter().map(|y| (y / scale(*y)).powi(2)).sum::<f64>() / n).sqrt();
        let d1 = (y0.iter().zip(f0).map(|(y, f)| (f / scale(*y)).powi(2)).sum::<f64>() / n).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span).min(self.max_step);
        let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
        let mut f1 = vec![0.0; y0.len()];
        rhs(t0 + h0, &y1, &mut f1);
        let d2 = (y0
            .iter()
            .zip(f0.iter().zip(&f1))
            .map(|(y, (a, b))| ((b - a) / scale(*y)).powi(2))
            .sum::<f64>()
            / n)
            .sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.max_step)
    }

    /// Integrates `dy/dt = rhs(t, y)` from `t0` to `t_end`.
    pub fn integrate<F>(&self, mut rhs: F, t0: f64, y0: &[f64], t_end: f64, sampling: Sampling) -> Result<OdeSolution>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        if !(t_end > t0) {
            return Err(Error::InvalidArgument(format!("t_end ({t_end}) must exceed t0 ({t0})")));
        }
        if let Sampling::Uniform(dt) = sampling {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument(format!("sampling interval must be positive, got {dt}")));
            }
        }
        let n = y0.len();
        let mut sol = OdeSolution::default();
        if !matches!(sampling, Sampling::Final) {
            sol.times.push(t0);
            sol.states.push(y0.to_vec());
        }
        let mut next_sample = 1usize;

        let mut y = y0.to_vec();
        let mut t = t0;
        let mut k1 = vec![0.0; n];
        rhs(t, &y, &mut k1);
        let mut h = self.initial_step(&mut rhs, t0, &y, &k1, t_end - t0);

        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut k5 = vec![0.0; n];
        let mut k6 = vec![0.0; n];
        let mut k7 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        let mut y_new = vec![0.0; n];
        let mut err = vec![0.0; n];
        let mut prev_err: f64 = 1e-4;

        let mut steps = 0usize;
        while t < t_end {
            if steps >= self.max_steps {
                return Err(Error::TooManySteps { max_steps: self.max_steps, t_end });
            }
            steps += 1;
            let mut last = false;
            if t + h >= t_end || t + 1.01 * h >= t_end {
                h = t_end - t;
                last = true;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t, h });
            }

            for i in 0..n {
                tmp[i] = y[i] + h * A21 * k1[i];
            }
            rhs(t + C2 * h, &tmp, &mut k2);
            for i in 0..n {
                tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
            }
            rhs(t + C3 * h, &tmp, &mut k3);
            for i in 0..n {
                tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
            }
            rhs(t + C4 * h, &tmp, &mut k4);
            for i in 0..n {
                tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
            }
            rhs(t + C5 * h, &tmp, &mut k5);
            for i in 0..n {
                tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
            }
            rhs(t + h, &tmp, &mut k6);
            for i in 0..n {
                y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
            }
            let t_new = if last { t_end } else { t + h };
            rhs(t_new, &y_new, &mut k7);
            for i in 0..n {
                err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            }
            let err_norm = self.error_norm(&y, &y_new, &err);
            if !err_norm.is_finite() {
                sol.rejected_steps += 1;
                h *= 0.2;
                continue;
            }

            if err_norm <= 1.0 {
                if let Sampling::Uniform(dt) = sampling {
                    loop {
                        let ts = t0 + next_sample as f64 * dt;
                        if ts >= t_new || ts > t_end {
                            break;
                        }
                        let theta = (ts - t) / h;
                        sol.times.push(ts);
                        sol.states.push(dense_output(theta, h, &y, &y_new, [&k1, &k3, &k4, &k5, &k6, &k7]));
                        next_sample += 1;
                    }
                }
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                t = t_new;
                sol.accepted_steps += 1;
                match sampling {
                    Sampling::Steps => {
                        sol.times.push(t);
                        sol.states.push(y.clone());
                    }
                    Sampling::Uniform(dt) => {
                        let ts = t0 + next_sample as f64 * dt;
                        if last || (ts - t).abs() <= 1e-12 * t.abs().max(1.0) {
                            sol.times.push(t);
                            sol.states.push(y.clone());
                            next_sample += 1;
                        }
                    }
                    Sampling::Final => {}
                }
                if last {
                    break;
                }
                // PI step-size control
                let factor = 0.9 * err_norm.max(1e-10).powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0);
                h = (h * factor.clamp(0.2, 5.0)).min(self.max_step);
                prev_err = err_norm.max(1e-4);
            } else {
                sol.rejected_steps += 1;
                let factor = 0.9 * err_norm.powf(-0.2);
                h *= factor.clamp(0.2, 1.0);
            }
        }
        if matches!(sampling, Sampling::Final) {
            sol.times.push(t);
            sol.states.push(y);
        }
        Ok(sol)
    }
}

fn dense_output(theta: f64, h: f64, y0: &[f64], y1: &[f64], k: [&Vec<f64>; 6]) -> Vec<f64> {
    let [k1, k3, k4, k5, k6, k7] = k;
    let theta1 = 1.0 - theta;
    (0..y0.len())
        .map(|i| {
            let diff = y1[i] - y0[i];
            let bspl = h * k1[i] - diff;
            let r4 = diff - h * k7[i] - bspl;
            let r5 = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            y0[i] + theta * (diff + theta1 * (bspl + theta * (r4 + theta1 * r5)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn harmonic_oscillator_final_state() {
        let sol = Dopri5::new(1e-11, 1e-13)
            .integrate(oscillator, 0.0, &[1.0, 0.0], 10.0, Sampling::Final)
            .unwrap();
        let y = sol.last().unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
        assert_eq!(sol.times, vec![10.0]);
    }

    #[test]
    fn uniform_samples_use_accurate_interpolation() {
        let sol = Dopri5::new(1e-10, 1e-12)
            .integrate(oscillator, 0.0, &[1.0, 0.0], 20.0, Sampling::Uniform(0.01))
            .unwrap();
        assert_eq!(sol.times.len(), 2001);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t = {t}");
        }
        assert!((sol.times.last().unwrap() - 20.0).abs() < 1e-12);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn step_sampling_is_strictly_increasing() {
        let sol = Dopri5::new(1e-8, 1e-10)
            .integrate(oscillator, 0.0, &[1.0, 0.0], 5.0, Sampling::Steps)
            .unwrap();
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(sol.times.len(), sol.states.len());
        assert_eq!(*sol.times.last().unwrap(), 5.0);
    }

    #[test]
    fn exponential_decay() {
        let sol = Dopri5::new(1e-10, 1e-14)
            .integrate(|_, y, dy| dy[0] = -3.0 * y[0], 0.0, &[2.0], 4.0, Sampling::Final)
            .unwrap();
        let exact = 2.0 * (-12f64).exp();
        assert!((sol.last().unwrap()[0] - exact).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_interval() {
        assert!(Dopri5::new(1e-6, 1e-9).integrate(oscillator, 1.0, &[1.0, 0.0], 1.0, Sampling::Final).is_err());
    }
}
