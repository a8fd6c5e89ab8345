use super::{NoiseError, SpectralDensity};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Relaxation {
    /// rad/ms
    pub gamma10: f64,
    /// ms; infinite when the spectrum vanishes at the qubit frequency.
    pub t1: f64,
}

/// Golden-rule rate `Γ₁₀ = S(ω_q)/4` and `T1 = 1/Γ₁₀`.
pub fn relaxation_from_spectrum(s: &SpectralDensity, omega_qubit: f64) -> Result<Relaxation, NoiseError> {
    s.validate()?;
    if matches!(s, SpectralDensity::Static { variance } if *variance > 0.0) && omega_qubit == 0.0 {
        return Err(NoiseError::InvalidParams("static noise has no finite density at zero frequency".into()));
    }
    let gamma10 = s.eval(omega_qubit) / 4.0;
    Ok(Relaxation {
        gamma10,
        t1: if gamma10 == 0.0 { f64::INFINITY } else { 1.0 / gamma10 },
    })
}

/// `1/T2 = 1/(2T1) + 1/Tφ`; infinite inputs drop their term.
pub fn compose_t2(t1: f64, t_phi: f64) -> Result<f64, NoiseError> {
    if !(t1 > 0.0) || !(t_phi > 0.0) {
        return Err(NoiseError::InvalidParams("T1 and Tφ must be positive".into()));
    }
    let rate = 1.0 / (2.0 * t1) + 1.0 / t_phi;
    Ok(if rate == 0.0 { f64::INFINITY } else { 1.0 / rate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_rule() {
        let r = relaxation_from_spectrum(&SpectralDensity::White { s0: 4.0 }, 12.0).unwrap();
        assert_eq!((r.gamma10, r.t1), (1.0, 1.0));
        let r = relaxation_from_spectrum(&SpectralDensity::Static { variance: 1.0 }, 3.0).unwrap();
        assert_eq!(r.t1, f64::INFINITY);
    }

    #[test]
    fn composition() {
        assert_eq!(compose_t2(1.5, f64::INFINITY).unwrap(), 3.0);
        assert!((compose_t2(1.0, 1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(compose_t2(f64::INFINITY, f64::INFINITY).unwrap(), f64::INFINITY);
        assert!(compose_t2(0.0, 1.0).is_err());
    }
}
