//! Collective angular-momentum operators on the maximal-j (Dicke) manifold.
//!
//! The basis is ordered by descending magnetic quantum number: index 0 is
//! `|j, +j>` and index `2j` is `|j, -j>`. Every operator here is a dense
//! `(N+1) x (N+1)` complex matrix in that ordering.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// The `(N+1)`-dimensional Dicke manifold with `j = N/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DickeBasis {
    n_spins: usize,
}

impl DickeBasis {
    pub fn new(n_spins: usize) -> Result<Self> {
        if n_spins == 0 {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        Ok(DickeBasis { n_spins })
    }

    pub fn n_spins(&self) -> usize {
        self.n_spins
    }

    /// Twice the total angular momentum, `2j = N`.
    pub fn two_j(&self) -> usize {
        self.n_spins
    }

    pub fn j(&self) -> f64 {
        self.n_spins as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.n_spins + 1
    }

    /// Magnetic quantum number of basis state `index`.
    pub fn m(&self, index: usize) -> f64 {
        debug_assert!(index < self.dim());
        (self.two_j() as f64 - 2.0 * index as f64) / 2.0
    }

    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m(i)).collect()
    }

    /// Index of `|j, -j>`, the fully decayed state.
    pub fn lowest_index(&self) -> usize {
        self.two_j()
    }
}

/// A dense operator acting on a [`DickeBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct DenseComplexOperator {
    basis: DickeBasis,
    matrix: DMatrix<Complex64>,
}

impl DenseComplexOperator {
    pub fn from_matrix(basis: DickeBasis, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{}, basis dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(DenseComplexOperator { basis, matrix })
    }

    pub fn zeros(basis: DickeBasis) -> Self {
        let d = basis.dim();
        DenseComplexOperator { basis, matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(basis: DickeBasis) -> Self {
        let d = basis.dim();
        DenseComplexOperator { basis, matrix: DMatrix::identity(d, d) }
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

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        DenseComplexOperator { basis: self.basis, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        DenseComplexOperator { basis: self.basis, matrix: &self.matrix * Complex64::new(factor, 0.0) }
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        DenseComplexOperator { basis: self.basis, matrix: &self.matrix * factor }
    }

    /// `[self, other] = self * other - other * self`.
    pub fn commutator(&self, other: &DenseComplexOperator) -> Self {
        DenseComplexOperator {
            basis: self.basis,
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).iter().all(|z| z.norm() <= tol)
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

impl<'a> Add<&'a DenseComplexOperator> for &'a DenseComplexOperator {
    type Output = DenseComplexOperator;
    fn add(self, rhs: &'a DenseComplexOperator) -> DenseComplexOperator {
        DenseComplexOperator { basis: self.basis, matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a DenseComplexOperator> for &'a DenseComplexOperator {
    type Output = DenseComplexOperator;
    fn sub(self, rhs: &'a DenseComplexOperator) -> DenseComplexOperator {
        DenseComplexOperator { basis: self.basis, matrix: &self.matrix - &rhs.matrix }
    }
}

impl<'a> Mul<&'a DenseComplexOperator> for &'a DenseComplexOperator {
    type Output = DenseComplexOperator;
    fn mul(self, rhs: &'a DenseComplexOperator) -> DenseComplexOperator {
        DenseComplexOperator { basis: self.basis, matrix: &self.matrix * &rhs.matrix }
    }
}

/// Lowering and raising operators `(J-, J+)`.
///
/// `<j, m-1| J- |j, m> = sqrt(j(j+1) - m(m-1))`; `J+` is the adjoint of `J-`.
pub fn op_ladder(basis: DickeBasis) -> (DenseComplexOperator, DenseComplexOperator) {
    let d = basis.dim();
    let j = basis.j();
    let mut lower = DMatrix::<Complex64>::zeros(d, d);
    // state k has m = j - k, so J- maps column k to row k+1
    for k in 0..d - 1 {
        let m = basis.m(k);
        lower[(k + 1, k)] = Complex64::new((j * (j + 1.0) - m * (m - 1.0)).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    (
        DenseComplexOperator { basis, matrix: lower },
        DenseComplexOperator { basis, matrix: raise },
    )
}

/// Cartesian components `(Jx, Jy, Jz)`.
pub fn op_cartesian(basis: DickeBasis) -> (DenseComplexOperator, DenseComplexOperator, DenseComplexOperator) {
    let (lower, raise) = op_ladder(basis);
    let half = Complex64::new(0.5, 0.0);
    let minus_half_i = Complex64::new(0.0, -0.5);
    let jx = (&raise.matrix + &lower.matrix) * half;
    let jy = (&raise.matrix - &lower.matrix) * minus_half_i;
    let jz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        basis.dim(),
        basis.m_values().into_iter().map(|m| Complex64::new(m, 0.0)),
    ));
    (
        DenseComplexOperator { basis, matrix: jx },
        DenseComplexOperator { basis, matrix: jy },
        DenseComplexOperator { basis, matrix: jz },
    )
}

/// `J^2 = j(j+1) * I` on the Dicke manifold.
pub fn op_casimir(basis: DickeBasis) -> DenseComplexOperator {
    let j = basis.j();
    DenseComplexOperator::identity(basis).scale(j * (j + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn basis_rejects_zero_spins() {
        assert!(DickeBasis::new(0).is_err());
    }

    #[test]
    fn single_spin_basis() {
        let b = DickeBasis::new(1).unwrap();
        assert_eq!(b.two_j(), 1);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.m_values(), vec![0.5, -0.5]);
    }

    #[test]
    fn two_spin_basis() {
        let b = DickeBasis::new(2).unwrap();
        assert_eq!(b.j(), 1.0);
        assert_eq!(b.m_values(), vec![1.0, 0.0, -1.0]);
    }

    #[test]
    fn fifty_spins_has_dimension_51() {
        let b = DickeBasis::new(50).unwrap();
        assert_eq!(b.dim(), 51);
        let m = b.m_values();
        assert!(m.windows(2).all(|w| w[0] - w[1] == 1.0));
        assert_eq!(m[0], 25.0);
        assert_eq!(m[50], -25.0);
    }

    #[test]
    fn spin_half_lowering() {
        let (lower, _) = op_ladder(DickeBasis::new(1).unwrap());
        assert_eq!(lower.get(1, 0), c(1.0));
        assert_eq!(lower.get(0, 1), c(0.0));
    }

    #[test]
    fn spin_one_lowering_from_top() {
        let (lower, _) = op_ladder(DickeBasis::new(2).unwrap());
        assert!((lower.get(1, 0).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((lower.get(2, 1).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lowering_annihilates_bottom_state() {
        for n in [1, 2, 7, 20] {
            let b = DickeBasis::new(n).unwrap();
            let (lower, _) = op_ladder(b);
            let col = lower.matrix().column(b.lowest_index()).into_owned();
            assert!(col.iter().all(|z| *z == c(0.0)));
        }
    }

    #[test]
    fn raising_is_exact_adjoint() {
        let (lower, raise) = op_ladder(DickeBasis::new(9).unwrap());
        assert_eq!(raise.matrix(), &lower.matrix().adjoint());
    }

    #[test]
    fn spin_half_cartesian() {
        let b = DickeBasis::new(1).unwrap();
        let (jx, _, jz) = op_cartesian(b);
        assert_eq!(jz.get(0, 0), c(0.5));
        assert_eq!(jz.get(1, 1), c(-0.5));
        let sq = &jx * &jx;
        let quarter = DenseComplexOperator::identity(b).scale(0.25);
        assert!((&sq - &quarter).max_abs() < 1e-15);
    }

    #[test]
    fn spin_one_jx_off_diagonals() {
        let (jx, jy, _) = op_cartesian(DickeBasis::new(2).unwrap());
        let s = 1.0 / 2f64.sqrt();
        for (r, col) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert!((jx.get(r, col).re - s).abs() < 1e-15);
        }
        assert_eq!(jx.get(0, 2), c(0.0));
        assert!(jx.is_hermitian(0.0));
        assert!(jy.is_hermitian(0.0));
    }

    #[test]
    fn casimir_values() {
        let half = op_casimir(DickeBasis::new(1).unwrap());
        assert_eq!(half.get(0, 0), c(0.75));
        let one = op_casimir(DickeBasis::new(2).unwrap());
        assert_eq!(one.get(2, 2), c(2.0));
    }

    #[test]
    fn casimir_matches_sum_of_squares_at_ten_spins() {
        let b = DickeBasis::new(10).unwrap();
        let (jx, jy, jz) = op_cartesian(b);
        let sum = &(&(&jx * &jx) + &(&jy * &jy)) + &(&jz * &jz);
        let expected = op_casimir(b);
        assert_eq!(expected.get(0, 0), c(30.0));
        assert!((&sum - &expected).max_abs() < 1e-12);
    }
}
