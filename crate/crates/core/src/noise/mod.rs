//! Classical noise layer: filter functions, Gaussian-noise coherence,
//! spectral densities, golden-rule relaxation and Bloch equations.
//!
//! Convention: `F(ω, t) = |ỹ(ω)|²/2` with `ỹ(ω) = ∫₀ᵗ y(τ) e^{iωτ} dτ`, and
//! `L(t) = exp[-(1/2π) ∫ S(ω) F(ω, t) dω]` over the whole real axis, where
//! `S(ω) = ∫ ⟨ν(τ)ν(0)⟩ e^{iωτ} dτ`. Static noise then gives
//! `exp(-⟨ν²⟩t²/2)` under Ramsey and the Hahn filter is `8 sin⁴(ωt/4)/ω²`.

mod bloch;
mod coherence;
mod filter;
mod quadrature;
mod relax;
mod spectrum;

use thiserror::Error;

pub use bloch::{bloch_solve, BlochParams, FieldProfile};
pub use coherence::{decay_exponent, decay_exponent_quadrature, gaussian_coherence};
pub use filter::{filter_freq, filter_time, SwitchingFunction};
pub use quadrature::{integrate, integrate_semi_infinite, Integral, DEFAULT_REL_TOL};
pub use relax::{compose_t2, relaxation_from_spectrum, Relaxation};
pub use spectrum::{correlation_from_spectrum, parse_spectrum, spectrum_from_correlation, Correlation, SpectralDensity};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("quadrature did not converge: {msg} (estimate {estimate:e}, error {error:e})")]
    Quadrature { msg: String, estimate: f64, error: f64 },
    #[error("invalid spectral density: {0}")]
    InvalidSpectrum(String),
    #[error("divergent correlation: {0}")]
    Divergent(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("{source_name}:{line}: {msg}")]
    Parse { source_name: String, line: usize, msg: String },
}
