//! Independent reference implementations: full joint-space propagation,
//! vectorized master equations and classical noise Monte Carlo.
//!
//! Nothing here uses the eigendecomposition or Padé exponential of the
//! engines; matrix exponentials are computed by Taylor scaling and squaring.

mod expm;
mod exact;
mod ou;

use thiserror::Error;

pub use exact::{exact_autocorrelation, exact_coherence, exact_lindblad, JointSystem};
pub use expm::expm_taylor;
pub use ou::ou_monte_carlo;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dimension {dim} exceeds oracle limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },
    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
    #[error("bath-free reference vanishes at t = {0} ms")]
    VanishingReference(f64),
}

/// Largest joint dimension for unitary propagation and for master equations
/// (whose superoperator is the square of this).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_unitary_dim: usize,
    pub max_lindblad_dim: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_unitary_dim: 4096,
            max_lindblad_dim: 64,
        }
    }
}
