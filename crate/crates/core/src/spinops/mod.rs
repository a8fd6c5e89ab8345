//! Spin algebra and spin-Hamiltonian terms.

mod assemble;
pub mod constants;
mod operators;
mod tensor;
mod terms;

use std::fmt;

use thiserror::Error;

pub use assemble::{assemble_cluster_hamiltonian, CentralSpin, ClusterAssembly, ClusterHamiltonian, LevelSelector};
pub use constants::{IsotopeTable, PhysicalConstants, SpinSpecies, MHZ_TO_RAD_PER_MS};
pub use operators::{build_spin_operators, SpinOperators};
pub use tensor::{Tensor3, TensorUnit};
pub use terms::{
    dipolar_tensor, hyperfine_components, quadrupole_term, zeeman_term, zfs_term, ZeemanCoupling, Zfs,
    DEFAULT_R_MIN,
};

/// Largest supported spin quantum number (9/2).
pub const MAX_TWICE_SPIN: u32 = 9;

#[derive(Debug, Error)]
pub enum SpinError {
    #[error("spin {0} is not a supported half-integer (allowed 0..=9/2)")]
    UnsupportedSpin(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("unit mismatch: {0}")]
    UnitMismatch(String),
    #[error("spins at {a:?} and {b:?} are closer than {r_min} Å")]
    CoincidentSpins { a: [f64; 3], b: [f64; 3], r_min: f64 },
    #[error("missing coupling tensor between bath spins {0} and {1}")]
    MissingCoupling(usize, usize),
    #[error("missing hyperfine tensor for bath spin {0}")]
    MissingHyperfine(usize),
    #[error("invalid species: {0}")]
    InvalidSpecies(String),
    #[error("unknown isotope `{name}`; available: {available}")]
    UnknownIsotope { name: String, available: String },
    #[error("table error: {0}")]
    Table(String),
    #[error("invalid central spin: {0}")]
    InvalidCentral(String),
}

/// Half-integer spin quantum number stored as `2s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    pub fn from_twice(twice: u32) -> Result<Self, SpinError> {
        if twice > MAX_TWICE_SPIN {
            return Err(SpinError::UnsupportedSpin(format!("{}/2", twice)));
        }
        Ok(Spin(twice))
    }

    pub fn from_f64(s: f64) -> Result<Self, SpinError> {
        let twice = 2.0 * s;
        if !twice.is_finite() || twice < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(SpinError::UnsupportedSpin(s.to_string()));
        }
        Self::from_twice(twice.round() as u32)
    }

    /// Accepts `1/2`, `3/2`, `1`, `0.5`.
    pub fn parse(text: &str) -> Result<Self, SpinError> {
        let bad = || SpinError::UnsupportedSpin(text.to_string());
        if let Some((num, den)) = text.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            let den: u32 = den.trim().parse().map_err(|_| bad())?;
            match den {
                1 => Self::from_twice(2 * num),
                2 => Self::from_twice(num),
                _ => Err(bad()),
            }
        } else {
            Self::from_f64(text.trim().parse().map_err(|_| bad())?)
        }
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `m` value of basis index `k` (descending-m ordering).
    pub fn m_of_index(self, k: usize) -> f64 {
        self.value() - k as f64
    }

    /// Basis index of projection `m`, if it is a valid projection.
    pub fn index_of_m(self, m: f64) -> Option<usize> {
        let k = self.value() - m;
        if k < -1e-9 || (k - k.round()).abs() > 1e-9 {
            return None;
        }
        let k = k.round() as usize;
        (k < self.dim()).then_some(k)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_parsing() {
        assert_eq!(Spin::parse("1/2").unwrap(), Spin::HALF);
        assert_eq!(Spin::parse("1").unwrap(), Spin::ONE);
        assert_eq!(Spin::parse("4.5").unwrap().twice(), 9);
        assert!(Spin::parse("0.3").is_err());
        assert!(Spin::parse("11/2").is_err());
        assert!(Spin::from_f64(-0.5).is_err());
        assert_eq!(Spin::from_twice(3).unwrap().to_string(), "3/2");
    }

    #[test]
    fn m_index_roundtrip() {
        let s = Spin::from_twice(3).unwrap();
        for k in 0..s.dim() {
            assert_eq!(s.index_of_m(s.m_of_index(k)), Some(k));
        }
        assert_eq!(s.index_of_m(0.0), None);
        assert_eq!(s.index_of_m(2.5), None);
    }
}
