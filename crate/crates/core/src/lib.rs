//! Central-spin decoherence in interacting spin baths.
//!
//! The crate is organised around the pieces needed to predict the coherence
//! function `L(t)` of a spin qubit embedded in a bath of electron or nuclear
//! spins:
//!
//! * [`spinops`]: spin matrices and the terms of the spin Hamiltonian.
//! * [`bath`]: isotope placement on lattices, coupling tensors, connectivity
//!   and cluster enumeration.
//! * [`cce`]: the cluster-correlation expansion engines (projected, generalized,
//!   sampled, dissipative) together with autocorrelation and fitting.
//! * [`noise`]: filter functions, Gaussian-noise coherence, golden-rule
//!   relaxation and Bloch equations.
//! * [`oracle`]: independent exact reference implementations.
//! * [`cli`]: configuration, orchestration and result emission.
//!
//! Internal units: angular frequencies in rad/ms, times in ms, distances in Å,
//! magnetic fields in Gauss.

pub mod bath;
pub mod cce;
pub mod cli;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod spinops;

mod error;

pub use error::{Error, Result};
