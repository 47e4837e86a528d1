//! Steady-state phase structure of an all-to-all transverse-field Ising model
//! with collective decay.
//!
//! Two complementary descriptions are provided:
//!
//! * [`meanfield`]: the Bloch equations for the normalized magnetization,
//!   closed-form steady states, multi-start fixed-point search, stability,
//!   limit cycles and continuation.
//! * [`liouville`]: the exact master equation restricted to the
//!   `(N+1)`-dimensional Dicke manifold, its vectorized Liouvillian, steady
//!   states, spectral gap and time evolution.
//!
//! [`sweep`] scans parameter grids with either description and [`cli`]
//! drives batch runs from a config file.

// `!(x > 0.0)` deliberately rejects NaN alongside out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod collective;
pub mod error;
pub mod linalg;
pub mod liouville;
pub mod meanfield;
pub mod ode;
pub mod params;
pub mod sweep;

pub use error::{Error, Result};
pub use meanfield::BlochVector;
pub use params::{ModelParams, SweepParam};
