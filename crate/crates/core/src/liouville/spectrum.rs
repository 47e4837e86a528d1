use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{DensityMatrix, LiouvillianMatrix};
use crate::error::{Error, Result};
use crate::linalg::{norm2, shift_invert_eigs_with, ArnoldiOptions, BandedLu, EigenPairs};

/// Largest N for full dense diagonalization.
pub const DENSE_MAX_N: usize = 30;
/// Largest N for the shift-invert eigensolver.
pub const ITERATIVE_MAX_N: usize = 100;
/// Required `||L vec(rho_ss)||_2` for an accepted steady state.
const STEADY_RESIDUAL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapMethod {
    /// Full spectrum by dense Schur decomposition (N <= 30).
    Dense,
    /// The `n_eigs` eigenvalues nearest zero by shift-invert Arnoldi (N <= 100).
    Iterative,
    /// Dense for N <= 30, iterative above.
    Auto,
}

impl GapMethod {
    pub fn resolve(self, n_spins: usize) -> GapMethod {
        match self {
            GapMethod::Auto if n_spins <= DENSE_MAX_N => GapMethod::Dense,
            GapMethod::Auto => GapMethod::Iterative,
            m => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralOptions {
    /// Eigenvalues requested from the iterative solver.
    pub n_eigs: usize,
    /// Arnoldi convergence tolerance relative to `max |L_ij|`.
    pub tol: f64,
    /// Eigenvalues with `|lambda| < zero_tolerance_factor * max |L_ij|` count as zero.
    pub zero_tolerance_factor: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { n_eigs: 12, tol: 1e-10, zero_tolerance_factor: 1e-10 }
    }
}

/// Eigenvalues, gap and steady state of a Liouvillian.
#[derive(Clone, Debug)]
pub struct SpectralResult {
    /// Sorted by descending real part; the full spectrum (dense) or the
    /// eigenvalues nearest zero (iterative).
    pub eigenvalues: Vec<Complex64>,
    /// `|Re lambda_1|` of the slowest nonzero eigenvalue (0 if none was found).
    pub gap: f64,
    pub steady_state: DensityMatrix,
    /// Eigenvalues with `|lambda| < zero_tolerance`.
    pub zero_multiplicity: usize,
    pub zero_tolerance: f64,
    /// Set when the zero eigenvalue is degenerate or the next eigenvalue lies
    /// within 10x of the zero tolerance.
    pub warning: Option<String>,
    pub method: GapMethod,
}

impl SpectralResult {
    pub fn near_degenerate(&self) -> bool {
        self.warning.is_some()
    }
}

/// Steady state with diagnostics.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// Eigenvalue of smallest modulus.
    pub eigenvalue: Complex64,
    /// `||L vec(rho)||_2` for the trace-normalized state.
    pub residual: f64,
    /// Computed eigenvalues with `|lambda| < zero_tolerance`.
    pub zero_multiplicity: usize,
    /// `zero_multiplicity > 1`; `rho` is then one representative.
    pub degenerate: bool,
    /// Smallest eigenvalue of `rho`; below `-1e-8` signals a solver problem.
    pub min_eigenvalue: f64,
}

impl SteadyState {
    pub fn positivity_violated(&self) -> bool {
        self.min_eigenvalue < -1e-8
    }
}

fn shift_for(l: &LiouvillianMatrix) -> f64 {
    // every eigenvalue has Re <= 0, so L - sigma I is nonsingular for sigma > 0
    1e-6 * l.max_abs().max(1.0)
}

/// Steady state: the eigenvector of the eigenvalue with smallest modulus,
/// symmetrized and trace-normalized.
pub fn steady_state(l: &LiouvillianMatrix) -> Result<DensityMatrix> {
    steady_state_detailed(l).map(|s| s.rho)
}

pub fn steady_state_detailed(l: &LiouvillianMatrix) -> Result<SteadyState> {
    let sigma = Complex64::new(shift_for(l), 0.0);
    let lu = BandedLu::factor_shifted(l.matrix(), sigma)?;
    let mut opts = ArnoldiOptions::new(4.min(l.dim()), sigma);
    opts.krylov_dim = 40;
    let pairs = shift_invert_eigs_with(l.matrix(), &lu, &opts)?;
    steady_from_pairs(l, &pairs, &SpectralOptions::default())
}

fn steady_from_pairs(l: &LiouvillianMatrix, pairs: &EigenPairs, opts: &SpectralOptions) -> Result<SteadyState> {
    let zero_tol = opts.zero_tolerance_factor * l.max_abs();
    let idx = (0..pairs.values.len())
        .min_by(|&a, &b| pairs.values[a].norm().total_cmp(&pairs.values[b].norm()))
        .ok_or(Error::Singular("empty eigenpair set"))?;
    let zero_multiplicity = pairs.values.iter().filter(|v| v.norm() < zero_tol).count();
    let basis = l.basis();
    let mut rho = DensityMatrix::from_vectorized(basis, &pairs.vectors[idx])?;
    let mut residual = norm2(&l.matrix().matvec(&rho.to_vectorized()));
    if residual > 1e-3 * STEADY_RESIDUAL {
        // inverse-iteration polish with a much smaller shift
        let tiny = Complex64::new(1e-12 * l.max_abs().max(1.0), 0.0);
        if let Ok(lu) = BandedLu::factor_shifted(l.matrix(), tiny) {
            let mut x = rho.to_vectorized();
            for _ in 0..3 {
                lu.solve_in_place(&mut x);
                let nx = norm2(&x);
                if !(nx.is_finite() && nx > 0.0) {
                    break;
                }
                x.iter_mut().for_each(|c| *c /= nx);
                let Ok(candidate) = DensityMatrix::from_vectorized(basis, &x) else { break };
                let r = norm2(&l.matrix().matvec(&candidate.to_vectorized()));
                if r < residual {
                    rho = candidate;
                    residual = r;
                } else {
                    break;
                }
            }
        }
    }
    if !(residual < STEADY_RESIDUAL) {
        return Err(Error::NoConvergence { what: "steady state", residuals: vec![residual] });
    }
    let min_eigenvalue = rho.min_eigenvalue();
    Ok(SteadyState {
        rho,
        eigenvalue: pairs.values[idx],
        residual,
        zero_multiplicity,
        degenerate: zero_multiplicity > 1,
        min_eigenvalue,
    })
}

pub fn liouvillian_gap(l: &LiouvillianMatrix, method: GapMethod) -> Result<SpectralResult> {
    liouvillian_gap_with(l, method, &SpectralOptions::default())
}

/// Spectrum near zero, gap `Delta = |Re lambda_1|` and steady state.
pub fn liouvillian_gap_with(l: &LiouvillianMatrix, method: GapMethod, opts: &SpectralOptions) -> Result<SpectralResult> {
    let n_spins = l.basis().n_spins();
    let method = method.resolve(n_spins);
    let (mut eigenvalues, steady) = match method {
        GapMethod::Dense => {
            if n_spins > DENSE_MAX_N {
                return Err(Error::TooLarge { n: n_spins, max: DENSE_MAX_N });
            }
            let ev = l
                .to_dense()
                .schur()
                .eigenvalues()
                .ok_or(Error::NoConvergence { what: "dense Schur decomposition", residuals: vec![] })?;
            (ev.iter().copied().collect::<Vec<_>>(), steady_state_detailed(l)?)
        }
        GapMethod::Iterative => {
            if n_spins > ITERATIVE_MAX_N {
                return Err(Error::TooLarge { n: n_spins, max: ITERATIVE_MAX_N });
            }
            let sigma = Complex64::new(shift_for(l), 0.0);
            let lu = BandedLu::factor_shifted(l.matrix(), sigma)?;
            let mut aopts = ArnoldiOptions::new(opts.n_eigs.max(2).min(l.dim()), sigma);
            aopts.tol = opts.tol;
            let pairs = match shift_invert_eigs_with(l.matrix(), &lu, &aopts) {
                Err(Error::NoConvergence { .. }) => {
                    // clustered eigenvalues at the edge of the wanted set:
                    // retry once with a larger Krylov space
                    aopts.krylov_dim = (2 * aopts.krylov_dim).min(l.dim());
                    shift_invert_eigs_with(l.matrix(), &lu, &aopts)?
                }
                other => other?,
            };
            let steady = steady_from_pairs(l, &pairs, opts)?;
            (pairs.values, steady)
        }
        GapMethod::Auto => unreachable!("resolved above"),
    };
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    let zero_tolerance = opts.zero_tolerance_factor * l.max_abs();
    let zero_multiplicity = eigenvalues.iter().filter(|v| v.norm() < zero_tolerance).count();
    let first_nonzero = eigenvalues.iter().find(|v| v.norm() >= zero_tolerance);
    let gap = first_nonzero.map_or(0.0, |v| v.re.abs());
    let smallest_nonzero = eigenvalues.iter().map(|v| v.norm()).filter(|m| *m >= zero_tolerance).fold(f64::INFINITY, f64::min);
    let warning = if zero_multiplicity > 1 {
        Some(format!("zero eigenvalue has multiplicity {zero_multiplicity} within tolerance {zero_tolerance:.3e}"))
    } else if smallest_nonzero < 10.0 * zero_tolerance {
        Some(format!(
            "second eigenvalue |lambda| = {smallest_nonzero:.3e} is within 10x of the zero tolerance {zero_tolerance:.3e}"
        ))
    } else {
        None
    };
    Ok(SpectralResult {
        eigenvalues,
        gap,
        steady_state: steady.rho,
        zero_multiplicity,
        zero_tolerance,
        warning,
        method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::collective::DickeBasis;
    use crate::liouville::{build_liouvillian, magnetization};
    use crate::params::ModelParams;

    fn liouvillian(n: usize, v: f64, g: f64, p: f64) -> LiouvillianMatrix {
        build_liouvillian(&ModelParams::new(v, g, p), DickeBasis::new(n).unwrap()).unwrap()
    }

    #[test]
    fn pure_decay_steady_state_is_ground() {
        let l = liouvillian(5, 0.0, 0.0, 0.0);
        let ss = steady_state(&l).unwrap();
        let ground = DensityMatrix::ground(l.basis());
        assert!(ss.trace_distance(&ground).unwrap() < 1e-10);
    }

    #[test]
    fn undriven_steady_state_is_dark() {
        // Jz^2 is diagonal, so the pole is dark at p = 1 for any V; for p < 1
        // the Jx^2 term mixes |j,-j> with |j,-j+2> and the pole is not stationary
        for (v, p) in [(-5.0, 1.0), (3.0, 1.0), (0.0, 0.4)] {
            let l = liouvillian(8, v, 0.0, p);
            let ss = steady_state_detailed(&l).unwrap();
            assert!(ss.rho.trace_distance(&DensityMatrix::ground(l.basis())).unwrap() < 1e-10);
            assert!(ss.residual < 1e-12);
        }
        let ss = steady_state(&liouvillian(8, -5.0, 0.0, 0.0)).unwrap();
        assert!(ss.trace_distance(&DensityMatrix::ground(ss.basis())).unwrap() > 1e-3);
    }

    #[test]
    fn p1_steady_state_near_mean_field() {
        let ss = steady_state(&liouvillian(10, -5.0, 1.0, 1.0)).unwrap();
        ss.validate().unwrap();
        let z = magnetization(&ss).z;
        assert!((z - -0.91673).abs() < 0.1, "{z}");
    }

    #[test]
    fn dense_and_iterative_agree() {
        let l = liouvillian(12, -5.0, 0.8, 0.4);
        let dense = liouvillian_gap(&l, GapMethod::Dense).unwrap();
        let iter = liouvillian_gap(&l, GapMethod::Iterative).unwrap();
        assert!((dense.gap - iter.gap).abs() < 1e-8 * dense.gap.max(1.0), "{} {}", dense.gap, iter.gap);
        assert_eq!(dense.zero_multiplicity, 1);
        assert_eq!(iter.zero_multiplicity, 1);
        assert!(dense.steady_state.trace_distance(&iter.steady_state).unwrap() < 1e-9);
        assert!(dense.eigenvalues.iter().all(|v| v.re <= 1e-8));
        assert_eq!(dense.eigenvalues.len(), 169);
        assert_eq!(dense.method, GapMethod::Dense);
    }

    #[test]
    fn auto_selects_by_size() {
        assert_eq!(GapMethod::Auto.resolve(30), GapMethod::Dense);
        assert_eq!(GapMethod::Auto.resolve(31), GapMethod::Iterative);
        let l = liouvillian(31, -5.0, 1.0, 0.0);
        assert!(matches!(liouvillian_gap(&l, GapMethod::Dense), Err(Error::TooLarge { n: 31, max: 30 })));
    }
}
