use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::collective::{op_cartesian, DickeBasis};
use crate::error::{Error, Result};
use crate::meanfield::BlochVector;

/// Tolerance for Hermiticity and unit trace.
const STATE_TOLERANCE: f64 = 1e-10;
/// Most negative eigenvalue accepted as numerical slack.
const POSITIVITY_SLACK: f64 = -1e-8;

/// A density matrix on the Dicke manifold.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    basis: DickeBasis,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace (both to `1e-10`) and positivity
    /// (eigenvalues `>= -1e-8`).
    pub fn new(basis: DickeBasis, matrix: DMatrix<Complex64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(basis, matrix)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix after checking only its shape.
    pub fn from_matrix_unchecked(basis: DickeBasis, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = basis.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "density matrix is {}x{}, basis dimension is {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(DensityMatrix { basis, matrix })
    }

    /// Un-vectorizes (column stacking), symmetrizes to `(rho + rho^dag)/2`
    /// and normalizes the trace.
    pub fn from_vectorized(basis: DickeBasis, v: &[Complex64]) -> Result<Self> {
        let d = basis.dim();
        if v.len() != d * d {
            return Err(Error::InvalidArgument(format!("vector length {} is not {}", v.len(), d * d)));
        }
        let m = DMatrix::from_column_slice(d, d, v);
        let trace = m.trace();
        let scale = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !(trace.norm() > 1e-12 * scale) {
            return Err(Error::Singular("trace normalization of a traceless vector"));
        }
        let m = m / trace;
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let trace = m.trace().re;
        Ok(DensityMatrix { basis, matrix: m / Complex64::new(trace, 0.0) })
    }

    /// `|index><index|` in the descending-m ordering.
    pub fn basis_state(basis: DickeBasis, index: usize) -> Result<Self> {
        if index >= basis.dim() {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range")));
        }
        let mut m = DMatrix::zeros(basis.dim(), basis.dim());
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(DensityMatrix { basis, matrix: m })
    }

    /// `|j, -j><j, -j|`, all spins down.
    pub fn ground(basis: DickeBasis) -> Self {
        Self::basis_state(basis, basis.lowest_index()).expect("lowest index is in range")
    }

    /// `|j, +j><j, +j|`, all spins up.
    pub fn top(basis: DickeBasis) -> Self {
        Self::basis_state(basis, 0).expect("index 0 is in range")
    }

    pub fn maximally_mixed(basis: DickeBasis) -> Self {
        let d = basis.dim();
        DensityMatrix { basis, matrix: DMatrix::identity(d, d) / Complex64::new(d as f64, 0.0) }
    }

    /// Spin coherent state whose Bloch vector points along `direction`
    /// (normalized internally): `exp(-i phi Jz) exp(-i theta Jy) |j, j>`.
    pub fn coherent(basis: DickeBasis, direction: &BlochVector) -> Result<Self> {
        let r = direction.norm();
        if !(r > 0.0) || !direction.is_finite() {
            return Err(Error::InvalidArgument("coherent state needs a nonzero finite direction".into()));
        }
        let theta = (direction.z / r).clamp(-1.0, 1.0).acos();
        let phi = direction.y.atan2(direction.x);
        let n = basis.two_j();
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let ln_binom = |k: usize| -> f64 { ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) };
        // basis index i has j + m = n - i
        let amps = DVector::from_iterator(
            basis.dim(),
            (0..basis.dim()).map(|i| {
                let up = n - i;
                let down = i;
                // theta in [0, pi], so both half-angle factors are non-negative
                let log_pow = |k: usize, x: f64| if k == 0 { 0.0 } else { k as f64 * x.ln() };
                let mag = (0.5 * ln_binom(up) + log_pow(up, c) + log_pow(down, s)).exp();
                let m = basis.m(i);
                Complex64::from_polar(mag, -m * phi)
            }),
        );
        let norm = amps.norm();
        let psi = amps / Complex64::new(norm, 0.0);
        Ok(DensityMatrix { basis, matrix: &psi * psi.adjoint() })
    }

    pub fn basis(&self) -> DickeBasis {
        self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Column-stacked vectorization.
    pub fn to_vectorized(&self) -> Vec<Complex64> {
        self.matrix.as_slice().to_vec()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `max |rho - rho^dag|`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > STATE_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density matrix is not Hermitian (error {herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > STATE_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density matrix trace is {tr}, expected 1")));
        }
        let min = self.min_eigenvalue();
        if min < POSITIVITY_SLACK {
            return Err(Error::InvalidArgument(format!("density matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `(1/2) sum |eig(rho - sigma)|`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.basis != other.basis {
            return Err(Error::DimensionMismatch { expected: self.basis.n_spins(), found: other.basis.n_spins() });
        }
        let diff = &self.matrix - &other.matrix;
        let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }
}

fn ln_factorial(k: usize) -> f64 {
    (1..=k).map(|i| (i as f64).ln()).sum()
}

/// Normalized magnetization `(tr(Jx rho), tr(Jy rho), tr(Jz rho)) / (N/2)`;
/// imaginary parts of the traces are discarded.
pub fn magnetization(rho: &DensityMatrix) -> BlochVector {
    let (jx, jy, jz) = op_cartesian(rho.basis);
    let half = rho.basis.j();
    let expect = |op: &DMatrix<Complex64>| -> f64 {
        // tr(A rho) = sum_ij A_ij rho_ji
        let mut acc = Complex64::new(0.0, 0.0);
        for c in 0..op.ncols() {
            for r in 0..op.nrows() {
                let a = op[(r, c)];
                if a != Complex64::new(0.0, 0.0) {
                    acc += a * rho.matrix[(c, r)];
                }
            }
        }
        acc.re / half
    };
    BlochVector::new(expect(jx.matrix()), expect(jy.matrix()), expect(jz.matrix()))
}
