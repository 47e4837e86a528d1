//! Physical parameters shared by the mean-field and quantum solvers.
//!
//! All rates are expressed in units of the decay rate; `gamma` defaults to 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the mixed Ising Hamiltonian with collective decay.
///
/// `n` is only consulted by the quantum solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Ising interaction strength.
    #[serde(rename = "V")]
    pub v: f64,
    /// Rabi frequency of the driving field.
    pub g: f64,
    /// Collective decay rate.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Weight of the z-interaction / x-field Hamiltonian, in `[0, 1]`.
    pub p: f64,
    /// Number of spins.
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

fn default_gamma() -> f64 {
    1.0
}

/// The three parameters a sweep may vary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepParam {
    V,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "p")]
    P,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::V => "V",
            SweepParam::G => "g",
            SweepParam::P => "p",
        }
    }
}

impl std::fmt::Display for SweepParam {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl ModelParams {
    pub fn new(v: f64, g: f64, p: f64) -> Self {
        ModelParams { v, g, gamma: 1.0, p, n: None }
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = Some(n);
        self
    }

    pub fn get(&self, which: SweepParam) -> f64 {
        match which {
            SweepParam::V => self.v,
            SweepParam::G => self.g,
            SweepParam::P => self.p,
        }
    }

    pub fn with(mut self, which: SweepParam, value: f64) -> Self {
        match which {
            SweepParam::V => self.v = value,
            SweepParam::G => self.g = value,
            SweepParam::P => self.p = value,
        }
        self
    }

    /// Checks `0 <= p <= 1`, `gamma > 0` and finiteness of every field.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("V", self.v), ("g", self.g), ("gamma", self.gamma), ("p", self.p)] {
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::InvalidArgument(format!(
                "p must satisfy 0 <= p <= 1, got p = {}",
                self.p
            )));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive, got gamma = {}",
                self.gamma
            )));
        }
        if self.n == Some(0) {
            return Err(Error::InvalidArgument("N must be at least 1".into()));
        }
        Ok(())
    }

    /// Spin count, required by the quantum solvers.
    pub fn spin_count(&self) -> Result<usize> {
        match self.n {
            Some(n) if n >= 1 => Ok(n),
            Some(_) => Err(Error::InvalidArgument("N must be at least 1".into())),
            None => Err(Error::InvalidArgument("N is required for quantum solvers".into())),
        }
    }

    /// Which parameters differ from `other`.
    pub fn differing(&self, other: &ModelParams) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.v != other.v {
            out.push("V");
        }
        if self.g != other.g {
            out.push("g");
        }
        if self.gamma != other.gamma {
            out.push("gamma");
        }
        if self.p != other.p {
            out.push("p");
        }
        if self.n != other.n {
            out.push("N");
        }
        out
    }
}
