//! Sparse complex linear algebra used by the Liouvillian solvers.
//!
//! The Liouvillian is a banded sparse matrix (bandwidth `~2(N+1)` under
//! column stacking), so a compressed-row matrix, a banded LU factorization
//! with partial pivoting and a shift-invert Arnoldi iteration cover every
//! solve needed up to N = 100.

mod arnoldi;
mod banded;
mod sparse;

pub use arnoldi::{shift_invert_eigs, shift_invert_eigs_with, ArnoldiOptions, EigenPairs};
pub use banded::BandedLu;
pub use sparse::CsrMatrix;

use num_complex::Complex64;

pub(crate) fn norm2(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a, b>` with the conjugate on `a`.
pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}
