use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{dot, norm2, BandedLu, CsrMatrix};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct ArnoldiOptions {
    /// Number of eigenvalues nearest `shift` to return.
    pub n_eigs: usize,
    /// Krylov subspace dimension per cycle.
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Convergence when `||A x - lambda x|| <= tol * max(max|A_ij|, 1)`.
    pub tol: f64,
    pub shift: Complex64,
    pub seed: u64,
}

impl ArnoldiOptions {
    pub fn new(n_eigs: usize, shift: Complex64) -> Self {
        ArnoldiOptions { n_eigs, krylov_dim: (3 * n_eigs).max(60), max_restarts: 40, tol: 1e-10, shift, seed: 0x5eed }
    }
}

/// Approximate eigenpairs of `A`, sorted by increasing distance from the
/// shift. Vectors have unit 2-norm.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<Complex64>,
    pub vectors: Vec<Vec<Complex64>>,
    /// `||A x - lambda x||` per pair.
    pub residuals: Vec<f64>,
}

/// Eigenpairs of `A` nearest `opts.shift` by Arnoldi iteration on
/// `(A - shift I)^{-1}` with explicit restarts.
pub fn shift_invert_eigs(a: &CsrMatrix, opts: &ArnoldiOptions) -> Result<EigenPairs> {
    let lu = BandedLu::factor_shifted(a, opts.shift)?;
    shift_invert_eigs_with(a, &lu, opts)
}

/// As [`shift_invert_eigs`] with a precomputed factorization of `A - shift I`.
pub fn shift_invert_eigs_with(a: &CsrMatrix, lu: &BandedLu, opts: &ArnoldiOptions) -> Result<EigenPairs> {
    let n = a.n_rows();
    if n == 0 || opts.n_eigs == 0 {
        return Err(Error::InvalidArgument("eigensolver needs a nonempty matrix and n_eigs >= 1".into()));
    }
    let k = opts.n_eigs.min(n);
    let m = opts.krylov_dim.max(k + 2).min(n);
    let scale = a.max_abs().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let mut last_residuals = Vec::new();
    for _ in 0..=opts.max_restarts {
        let (basis, h) = arnoldi(lu, &start, m);
        let ritz = ritz_pairs(&h);
        let mut pairs = Vec::with_capacity(k);
        for (theta, y) in ritz.into_iter().take(k) {
            let mut x = vec![ZERO; n];
            for (vj, yj) in basis.iter().zip(y.iter()) {
                for (xi, vi) in x.iter_mut().zip(vj) {
                    *xi += vi * yj;
                }
            }
            let nx = norm2(&x);
            x.iter_mut().for_each(|c| *c /= nx);
            let lambda = opts.shift + theta.inv();
            let ax = a.matvec(&x);
            let res = norm2(&ax.iter().zip(&x).map(|(p, q)| p - lambda * q).collect::<Vec<_>>());
            pairs.push((lambda, x, res));
        }
        last_residuals = pairs.iter().map(|p| p.2).collect();
        let converged = pairs.len() == k && pairs.iter().all(|p| p.2 <= opts.tol * scale);
        if converged || basis.len() == n {
            if !converged && !pairs.iter().all(|p| p.2 <= opts.tol * scale * 1e3) {
                break;
            }
            pairs.sort_by(|p, q| (p.0 - opts.shift).norm().total_cmp(&(q.0 - opts.shift).norm()));
            let mut out = EigenPairs { values: vec![], vectors: vec![], residuals: vec![] };
            for (l, x, r) in pairs {
                out.values.push(l);
                out.vectors.push(x);
                out.residuals.push(r);
            }
            return Ok(out);
        }
        // restart from the sum of the wanted Ritz vectors, weighted towards
        // the least converged ones
        start = vec![ZERO; n];
        for (_, x, r) in &pairs {
            let w = 1.0 + r / (opts.tol * scale);
            for (s, xi) in start.iter_mut().zip(x) {
                *s += xi * w.ln_1p();
            }
        }
    }
    Err(Error::NoConvergence { what: "shift-invert Arnoldi", residuals: last_residuals })
}

/// Arnoldi process on `(A - shift)^{-1}`. Returns the orthonormal basis
/// (possibly shorter than `m` on breakdown) and the square Hessenberg matrix.
fn arnoldi(lu: &BandedLu, start: &[Complex64], m: usize) -> (Vec<Vec<Complex64>>, DMatrix<Complex64>) {
    let n = start.len();
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    let mut h = DMatrix::<Complex64>::zeros(m + 1, m);
    let nrm = norm2(start);
    basis.push(start.iter().map(|c| c / nrm).collect());
    let mut size = m;
    for j in 0..m {
        let mut w = lu.solve(&basis[j]);
        let wnorm0 = norm2(&w);
        // classical Gram-Schmidt with one reorthogonalization pass
        for _ in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let c = dot(vi, &w);
                h[(i, j)] += c;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= c * vk;
                }
            }
        }
        let wn = norm2(&w);
        h[(j + 1, j)] = Complex64::new(wn, 0.0);
        if j + 1 == m {
            break;
        }
        if wn <= 1e-13 * wnorm0 || basis.len() == n {
            size = j + 1;
            break;
        }
        basis.push(w.iter().map(|c| c / wn).collect());
    }
    basis.truncate(size);
    (basis, h.view((0, 0), (size, size)).into_owned())
}

/// Eigenpairs of a small dense matrix sorted by decreasing modulus.
fn ritz_pairs(h: &DMatrix<Complex64>) -> Vec<(Complex64, Vec<Complex64>)> {
    let size = h.nrows();
    let (q, t) = h.clone().schur().unpack();
    let hnorm = t.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(size);
    for i in 0..size {
        let theta = t[(i, i)];
        let mut z = vec![ZERO; size];
        z[i] = Complex64::new(1.0, 0.0);
        for r in (0..i).rev() {
            let mut acc = ZERO;
            for c in r + 1..=i {
                acc += t[(r, c)] * z[c];
            }
            let mut d = t[(r, r)] - theta;
            if d.norm() < 1e-14 * hnorm {
                d = Complex64::new(1e-14 * hnorm, 0.0);
            }
            z[r] = -acc / d;
        }
        let y: Vec<Complex64> = (0..size).map(|r| (0..size).map(|c| q[(r, c)] * z[c]).sum()).collect();
        out.push((theta, y));
    }
    out.sort_by(|a, b| b.0.norm().total_cmp(&a.0.norm()));
    out
}
