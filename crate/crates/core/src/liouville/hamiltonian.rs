use crate::collective::{op_cartesian, DenseComplexOperator, DickeBasis};
use crate::error::{Error, Result};
use crate::params::ModelParams;

pub(crate) fn check_basis(params: &ModelParams, basis: DickeBasis) -> Result<()> {
    params.validate()?;
    match params.n {
        Some(n) if n != basis.n_spins() => Err(Error::DimensionMismatch { expected: n, found: basis.n_spins() }),
        _ => Ok(()),
    }
}

/// `H = (1-p) [(V/2N) Jx^2 + g Jz] + p [(V/2N) Jz^2 + g Jx]`, Eq. (1).
///
/// `params.n`, when set, must equal the basis spin count.
pub fn build_hamiltonian(params: &ModelParams, basis: DickeBasis) -> Result<DenseComplexOperator> {
    check_basis(params, basis)?;
    let (jx, _, jz) = op_cartesian(basis);
    let n = basis.n_spins() as f64;
    let coupling = params.v / (2.0 * n);
    let h0 = &(&jx * &jx).scale(coupling) + &jz.scale(params.g);
    let h1 = &(&jz * &jz).scale(coupling) + &jx.scale(params.g);
    Ok(&h0.scale(1.0 - params.p) + &h1.scale(params.p))
}
