use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hamiltonian::{build_hamiltonian, check_basis};
use crate::collective::{op_ladder, DickeBasis};
use crate::error::{Error, Result};
use crate::linalg::CsrMatrix;
use crate::params::ModelParams;

/// Largest spin count accepted by [`build_liouvillian`].
pub const MAX_N: usize = 200;

/// How density matrices are flattened into vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stacking {
    /// `vec(rho)[r + d c] = rho[r, c]`.
    ColumnMajor,
}

/// The vectorized Liouvillian, stored sparse.
#[derive(Clone, Debug)]
pub struct LiouvillianMatrix {
    params: ModelParams,
    basis: DickeBasis,
    stacking: Stacking,
    matrix: CsrMatrix,
}

impl LiouvillianMatrix {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn basis(&self) -> DickeBasis {
        self.basis
    }

    pub fn stacking(&self) -> Stacking {
        self.stacking
    }

    /// `(N+1)^2`.
    pub fn dim(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        self.matrix.to_dense()
    }

    /// `max |L_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    /// `unvec(L vec(rho))`.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        let d = self.basis.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "operator is {}x{}, Liouvillian acts on {d}x{d}",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let out = self.matrix.matvec(rho.as_slice());
        Ok(DMatrix::from_vec(d, d, out))
    }
}

/// Adds `coef * (a kron b)` to `triplets`, skipping zero entries.
fn push_kron(
    triplets: &mut Vec<(usize, usize, Complex64)>,
    a: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    coef: Complex64,
) {
    let d = b.nrows();
    let nonzero = |m: &DMatrix<Complex64>| -> Vec<(usize, usize, Complex64)> {
        let mut v = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let x = m[(r, c)];
                if x != Complex64::new(0.0, 0.0) {
                    v.push((r, c, x));
                }
            }
        }
        v
    };
    let nb = nonzero(b);
    for (ra, ca, xa) in nonzero(a) {
        for &(rb, cb, xb) in &nb {
            triplets.push((ra * d + rb, ca * d + cb, coef * xa * xb));
        }
    }
}

/// Builds the Liouvillian of Eq. (2) with the `gamma / 2N` prefactor, in the
/// column-stacking convention. Fails for `N > 200`.
pub fn build_liouvillian(params: &ModelParams, basis: DickeBasis) -> Result<LiouvillianMatrix> {
    if basis.n_spins() > MAX_N {
        return Err(Error::TooLarge { n: basis.n_spins(), max: MAX_N });
    }
    check_basis(params, basis)?;
    let d = basis.dim();
    let h = build_hamiltonian(params, basis)?.into_matrix();
    let (jm, jp) = op_ladder(basis);
    let jm = jm.into_matrix();
    let jpjm = jp.matrix() * &jm;
    let id = DMatrix::<Complex64>::identity(d, d);
    let rate = params.gamma / (2.0 * basis.n_spins() as f64);
    let i = Complex64::new(0.0, 1.0);
    let mut t = Vec::new();
    push_kron(&mut t, &id, &h, -i);
    push_kron(&mut t, &h.transpose(), &id, i);
    push_kron(&mut t, &jm.map(|z| z.conj()), &jm, Complex64::new(2.0 * rate, 0.0));
    push_kron(&mut t, &id, &jpjm, Complex64::new(-rate, 0.0));
    push_kron(&mut t, &jpjm.transpose(), &id, Complex64::new(-rate, 0.0));
    Ok(LiouvillianMatrix {
        params: *params,
        basis,
        stacking: Stacking::ColumnMajor,
        matrix: CsrMatrix::from_triplets(d * d, d * d, t),
    })
}

/// Right side of Eq. (2) by direct matrix products:
/// `-i [H, rho] + (gamma / 2N) (2 J- rho J+ - J+ J- rho - rho J+ J-)`.
#[derive(Clone, Debug)]
pub struct DirectLindblad {
    h: DMatrix<Complex64>,
    jm: DMatrix<Complex64>,
    jp: DMatrix<Complex64>,
    jpjm: DMatrix<Complex64>,
    rate: f64,
}

impl DirectLindblad {
    pub fn new(params: &ModelParams, basis: DickeBasis) -> Result<Self> {
        let h = build_hamiltonian(params, basis)?.into_matrix();
        let (jm, jp) = op_ladder(basis);
        let (jm, jp) = (jm.into_matrix(), jp.into_matrix());
        let jpjm = &jp * &jm;
        Ok(DirectLindblad { h, jm, jp, jpjm, rate: params.gamma / (2.0 * basis.n_spins() as f64) })
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let i = Complex64::new(0.0, 1.0);
        let comm = &self.h * rho - rho * &self.h;
        let diss = (&self.jm * rho * &self.jp) * Complex64::new(2.0, 0.0) - &self.jpjm * rho - rho * &self.jpjm;
        comm * (-i) + diss * Complex64::new(self.rate, 0.0)
    }
}
