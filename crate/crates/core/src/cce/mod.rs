//! Cluster-correlation expansion engines.
//!
//! Conventional CCE works with the bath Hamiltonians projected on the two
//! qubit levels; generalized CCE keeps the central spin inside every cluster.
//! Both factorize the coherence into irreducible cluster contributions that
//! are combined in a fixed order so results do not depend on scheduling.

mod autocorr;
mod coherence;
mod expand;
mod fit;
mod levels;
mod lindblad;
mod project;
mod pulses;
mod state;

use thiserror::Error;

use crate::bath::BathError;
use crate::spinops::SpinError;

pub use autocorr::autocorrelation_cce;
pub use coherence::{cluster_coherence, joint_coherence, validate_density};
pub use expand::{
    cce_expand, expand_with_state, gcce_expand, sampled_expand, simulate, CoherenceCurve, Diagnostics, EngineConfig,
    Method, SpinSystem, DEFAULT_EPSILON, GUARDED_FRACTION_LIMIT,
};
pub use fit::{fit_stretched, FitResult};
pub use levels::{mean_field_levels, select_levels, QubitLevels};
pub use lindblad::{jump_operator, lindblad_cluster};
pub use project::{project_hamiltonian, ProjectedPair};
pub use pulses::PulseSequence;
pub use state::BathState;

#[derive(Debug, Error)]
pub enum CceError {
    #[error("insufficient decay: |L| stays above 1/e (minimum {min_abs}) up to t = {t_max} ms")]
    InsufficientDecay { min_abs: f64, t_max: f64 },
    #[error("fit diverged: {0}")]
    FitDiverged(String),
    #[error("cluster dimension {dim} exceeds limit {limit}")]
    DimensionOverflow { dim: usize, limit: usize },
    #[error("qubit levels are not orthonormal (defect {0:e})")]
    NonOrthonormalLevels(f64),
    #[error("invalid qubit levels: {0}")]
    InvalidLevels(String),
    #[error("density matrix is not physical: {0}")]
    NonPhysicalState(String),
    #[error("invalid pulse sequence: {0}")]
    InvalidPulses(String),
    #[error("invalid time grid: {0}")]
    InvalidTimes(String),
    #[error("cluster {0:?} is missing a sub-cluster required by the recursion")]
    MissingSubcluster(Vec<usize>),
    #[error("negative dissipation rate {0}")]
    NegativeRate(f64),
    #[error("invalid engine configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Bath(#[from] BathError),
}

/// Uniform grid `0, dt, ..., (n-1) dt`.
pub fn uniform_times(t_max: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![0.0];
    }
    (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
}

pub(crate) fn check_times(times: &[f64]) -> Result<(), CceError> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(CceError::InvalidTimes("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CceError::InvalidTimes("times must be strictly ascending".into()));
    }
    Ok(())
}
