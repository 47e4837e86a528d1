use nalgebra::DMatrix;
use num_complex::Complex64;

/// Square-or-rectangular complex matrix in compressed sparse row format.
/// Column indices within a row are sorted and unique.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; n_rows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) outside {n_rows}x{n_cols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = CsrMatrix { n_rows, n_cols, indptr, indices, values };
        m.drop_zeros();
        m
    }

    fn drop_zeros(&mut self) {
        let mut indptr = vec![0; self.n_rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.n_rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != Complex64::new(0.0, 0.0) {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterates over `(row, col, value)` of the stored entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.n_rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let cols = &self.indices[self.indptr[row]..self.indptr[row + 1]];
        match cols.binary_search(&col) {
            Ok(k) => self.values[self.indptr[row] + k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    /// `y = A x` on vectors stored as interleaved `(re, im)` pairs.
    pub fn matvec_interleaved(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), 2 * self.n_cols);
        assert_eq!(y.len(), 2 * self.n_rows);
        for r in 0..self.n_rows {
            let (mut re, mut im) = (0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                let a = self.values[k];
                let c = self.indices[k];
                let (xr, xi) = (x[2 * c], x[2 * c + 1]);
                re += a.re * xr - a.im * xi;
                im += a.re * xi + a.im * xr;
            }
            y[2 * r] = re;
            y[2 * r + 1] = im;
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    /// Largest entry modulus, `max |A_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// `(lower, upper)` bandwidths: `A_ij = 0` unless `-lower <= j - i <= upper`.
    pub fn bandwidths(&self) -> (usize, usize) {
        self.iter().fold((0, 0), |(lo, up), (r, c, _)| {
            if c >= r {
                (lo, up.max(c - r))
            } else {
                (lo.max(r - c), up)
            }
        })
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn triplets_are_summed_and_sorted() {
        let m = CsrMatrix::from_triplets(2, 3, vec![(1, 2, c(1.0)), (0, 1, c(2.0)), (1, 2, c(3.0)), (0, 0, c(0.0))]);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(1, 2), c(4.0));
        assert_eq!(m.get(0, 0), c(0.0));
        assert_eq!(m.matvec(&[c(1.0), c(1.0), c(1.0)]), vec![c(2.0), c(4.0)]);
        assert_eq!(m.bandwidths(), (0, 1));
    }

    #[test]
    fn dense_round_trip() {
        let m = CsrMatrix::from_triplets(3, 3, vec![(2, 0, c(5.0)), (0, 2, Complex64::new(0.0, 1.0))]);
        let d = m.to_dense();
        assert_eq!(d[(2, 0)], c(5.0));
        assert_eq!(d[(0, 2)], Complex64::new(0.0, 1.0));
        assert_eq!(m.bandwidths(), (2, 2));
        assert_eq!(m.max_abs(), 5.0);
    }
}
