//! Exact master-equation treatment on the `(N+1)`-dimensional Dicke manifold.
//!
//! The density matrix is vectorized by stacking columns
//! (`vec(rho)[r + d c] = rho[r, c]`, the storage order of `nalgebra`), so
//! `vec(A rho B) = (B^T kron A) vec(rho)` and the Liouvillian reads
//!
//! ```text
//! L = -i (I kron H - H^T kron I)
//!     + (gamma / 2N) (2 conj(J-) kron J- - I kron (J+ J-) - (J+ J-)^T kron I).
//! ```
//!
//! The paper prints the same matrix in the row-stacking order; the
//! convention check in the tests compares `L vec(rho)` against Eq. (2)
//! evaluated with direct matrix products.

mod density;
mod evolution;
mod hamiltonian;
mod spectrum;
mod superoperator;

pub use density::{magnetization, DensityMatrix};
pub use evolution::{evolve_rho, evolve_rho_direct, evolve_rho_sampled, ramped_evolution, RampStep};
pub use hamiltonian::build_hamiltonian;
pub use spectrum::{
    liouvillian_gap, liouvillian_gap_with, steady_state, steady_state_detailed, GapMethod, SpectralOptions,
    SpectralResult, SteadyState, DENSE_MAX_N, ITERATIVE_MAX_N,
};
pub use superoperator::{build_liouvillian, DirectLindblad, LiouvillianMatrix, Stacking, MAX_N};
