use std::f64::consts::PI;

use crate::cce::PulseSequence;

use super::filter::{filter_freq, filter_time};
use super::quadrature::{integrate, integrate_semi_infinite, DEFAULT_REL_TOL};
use super::{NoiseError, SpectralDensity};

/// `½ ∫∫ y(τ₁) y(τ₂) ⟨ν²⟩ e^{-|τ₁-τ₂|/τc}`, summed segment by segment.
fn exponential_chi(variance: f64, tau_c: f64, pulses: &PulseSequence, t: f64) -> f64 {
    let y = filter_time(pulses, t);
    let segs: Vec<(f64, f64, f64)> = y.segments().collect();
    let e = |x: f64| (-x / tau_c).exp();
    let mut acc = 0.0;
    for (k, &(a, b, s)) in segs.iter().enumerate() {
        let x = (b - a) / tau_c;
        // same segment: ½ · 2τc²(x - 1 + e^{-x})
        acc += tau_c * tau_c * (x + (-x).exp_m1());
        for &(c, d, s2) in &segs[k + 1..] {
            acc += s * s2 * tau_c * tau_c * (e(c - b) - e(c - a) - e(d - b) + e(d - a));
        }
    }
    variance * acc
}

/// Decay exponent `χ(t) = (1/2π) ∫ S(ω) F(ω, t) dω` so that `L = e^{-χ}`.
/// Static, white and Lorentzian spectra are evaluated in closed form;
/// tabulated spectra by adaptive quadrature.
pub fn decay_exponent(s: &SpectralDensity, pulses: &PulseSequence, t: f64) -> Result<f64, NoiseError> {
    s.validate()?;
    Ok(match s {
        SpectralDensity::Static { variance } => variance * filter_freq(pulses, 0.0, t),
        // ∫ F dω = π t for any sign sequence (Parseval)
        SpectralDensity::White { s0 } => s0 * t / 2.0,
        SpectralDensity::Lorentzian { variance, tau_c } => exponential_chi(*variance, *tau_c, pulses, t),
        SpectralDensity::Tabulated { .. } => decay_exponent_quadrature(s, pulses, t)?,
    })
}

/// Same as [`decay_exponent`] but always by numerical integration over
/// `ω ≥ 0` (Gauss–Kronrod, relative tolerance `1e-8`). White and static
/// spectra have no convergent numerical form and fall back to the closed form.
pub fn decay_exponent_quadrature(s: &SpectralDensity, pulses: &PulseSequence, t: f64) -> Result<f64, NoiseError> {
    s.validate()?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let integrand = |w: f64| s.eval(w) * filter_freq(pulses, w, t);
    let half = match s {
        SpectralDensity::Static { .. } | SpectralDensity::White { .. } => return decay_exponent(s, pulses, t),
        SpectralDensity::Lorentzian { .. } => integrate_semi_infinite(integrand, 0.0, DEFAULT_REL_TOL, 1e-300)?.value,
        SpectralDensity::Tabulated { omega, .. } => {
            // integrate cell by cell so the interpolation kinks sit on boundaries
            let mut total = 0.0;
            for w in omega.windows(2) {
                total += integrate(integrand, w[0], w[1], DEFAULT_REL_TOL, 1e-300)?.value;
            }
            total
        }
    };
    Ok(half / PI)
}

/// `L(t) = exp(-χ(t))` on a time grid; real because `S` is even.
pub fn gaussian_coherence(s: &SpectralDensity, pulses: &PulseSequence, times: &[f64]) -> Result<Vec<f64>, NoiseError> {
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                Ok(1.0)
            } else {
                decay_exponent(s, pulses, t).map(|chi| (-chi).exp())
            }
        })
        .collect()
}
