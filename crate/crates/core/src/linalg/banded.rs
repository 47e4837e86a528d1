use num_complex::Complex64;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a banded matrix, `P A = L U`.
///
/// Row `i` keeps the window of columns `[i - kl, i + kl + ku]`, which holds
/// both the original band and the fill-in produced by row interchanges
/// (the LAPACK `gbtrf` layout, stored row-wise).
#[derive(Clone, Debug)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    /// Factorizes `a - shift * I`.
    pub fn factor_shifted(a: &CsrMatrix, shift: Complex64) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::InvalidArgument("banded LU needs a square matrix".into()));
        }
        let n = a.n_rows();
        let (kl, ku) = a.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = BandedLu { n, kl, ku, width, data: vec![Complex64::new(0.0, 0.0); n * width], pivots: vec![0; n] };
        for (r, c, v) in a.iter() {
            *lu.at_mut(r, c) += v;
        }
        for i in 0..n {
            *lu.at_mut(i, i) -= shift;
        }
        lu.eliminate()?;
        Ok(lu)
    }

    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        Self::factor_shifted(a, Complex64::new(0.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.idx(i, j)]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut Complex64 {
        let k = self.idx(i, j);
        &mut self.data[k]
    }

    fn eliminate(&mut self) -> Result<()> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut piv = k;
            let mut best = self.at(k, k).norm();
            for i in k + 1..=last_row {
                let v = self.at(i, k).norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular("banded LU"));
            }
            self.pivots[k] = piv;
            if piv != k {
                for j in k..=last_col {
                    let (a, b) = (self.idx(k, j), self.idx(piv, j));
                    self.data.swap(a, b);
                }
            }
            let inv = self.at(k, k).inv();
            let pivot_row = self.idx(k, k);
            for i in k + 1..=last_row {
                let l = self.at(i, k) * inv;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                *self.at_mut(i, k) = l;
                let base = self.idx(i, k);
                for off in 1..=(last_col - k) {
                    let u = self.data[pivot_row + off];
                    self.data[base + off] -= l * u;
                }
            }
        }
        Ok(())
    }

    /// Solves `(A - shift I) x = b` in place.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != Complex64::new(0.0, 0.0) {
                let end = (k + kl).min(n - 1);
                for (i, bi) in b.iter_mut().enumerate().take(end + 1).skip(k + 1) {
                    *bi -= self.at(i, k) * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let base = self.idx(k, k);
            let mut acc = b[k];
            for off in 1..=((k + kl + ku).min(n - 1) - k) {
                acc -= self.data[base + off] * b[k + off];
            }
            b[k] = acc / self.data[base];
        }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
