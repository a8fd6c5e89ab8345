use std::f64::consts::PI;

use super::NoiseError;

/// Classical noise spectrum `S(ω)`, even in `ω`. Domain rad/ms, values
/// (rad/ms)²·ms.
#[derive(Debug, Clone, PartialEq)]
pub enum SpectralDensity {
    White { s0: f64 },
    /// `2⟨ν²⟩τc / (1 + ω²τc²)`.
    Lorentzian { variance: f64, tau_c: f64 },
    /// `2π⟨ν²⟩δ(ω)`, handled analytically.
    Static { variance: f64 },
    /// Piecewise-linear on an ascending grid of `ω ≥ 0`, zero beyond it.
    Tabulated { omega: Vec<f64>, values: Vec<f64> },
}

impl SpectralDensity {
    pub fn validate(&self) -> Result<(), NoiseError> {
        let bad = |m: &str| Err(NoiseError::InvalidSpectrum(m.to_string()));
        match self {
            SpectralDensity::White { s0 } if !(*s0 >= 0.0 && s0.is_finite()) => bad("white level must be finite and non-negative"),
            SpectralDensity::Lorentzian { variance, tau_c }
                if !(*variance >= 0.0 && variance.is_finite() && *tau_c > 0.0 && tau_c.is_finite()) =>
            {
                bad("Lorentzian needs variance >= 0 and a finite positive correlation time")
            }
            SpectralDensity::Static { variance } if !(*variance >= 0.0 && variance.is_finite()) => {
                bad("static variance must be finite and non-negative")
            }
            SpectralDensity::Tabulated { omega, values } => {
                if omega.len() != values.len() || omega.len() < 2 {
                    return bad("tabulated spectrum needs at least two (ω, S) pairs");
                }
                if omega[0] < 0.0 || omega.windows(2).any(|w| w[1] <= w[0]) {
                    return bad("tabulated ω grid must be non-negative and strictly ascending");
                }
                if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                    return bad("tabulated S values must be finite and non-negative");
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// `S(ω)` for `ω ≠ 0`; the static delta contributes nothing here.
    pub fn eval(&self, omega: f64) -> f64 {
        let w = omega.abs();
        match self {
            SpectralDensity::White { s0 } => *s0,
            SpectralDensity::Lorentzian { variance, tau_c } => 2.0 * variance * tau_c / (1.0 + (w * tau_c).powi(2)),
            SpectralDensity::Static { .. } => 0.0,
            SpectralDensity::Tabulated { omega, values } => {
                if w < omega[0] || w > omega[omega.len() - 1] {
                    return 0.0;
                }
                let k = omega.partition_point(|&x| x <= w).clamp(1, omega.len() - 1);
                let f = (w - omega[k - 1]) / (omega[k] - omega[k - 1]);
                values[k - 1] + f * (values[k] - values[k - 1])
            }
        }
    }
}

/// Noise autocorrelation `⟨ν(τ)ν(0)⟩`.
#[derive(Debug, Clone, PartialEq)]
pub enum Correlation {
    /// `⟨ν²⟩ e^{-|τ|/τc}`.
    Exponential { variance: f64, tau_c: f64 },
    /// `S0 δ(τ)`.
    Delta { s0: f64 },
    /// `⟨ν²⟩` at all lags.
    Constant { variance: f64 },
    /// Samples at `τ_k = k Δτ`, `k = 0..N`.
    Tabulated { dtau: f64, values: Vec<f64> },
}

/// DCT-I with trapezoid end weights: `out_j = Σ'' x_k cos(π j k/(N-1))`.
fn dct1(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let m = (n - 1) as f64;
    (0..n)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(k, &v)| {
                    let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                    w * v * (PI * ((j * k) % (2 * (n - 1))) as f64 / m).cos()
                })
                .sum()
        })
        .collect()
}

/// `S(ω) = ∫ ⟨ν(τ)ν(0)⟩ e^{iωτ} dτ`. Parametric forms are transformed
/// analytically; tabulated correlations by the trapezoid cosine transform
/// `S(ω_j) = 2Δτ Σ'' C_k cos(ω_j τ_k)` on `ω_j = jπ/((N-1)Δτ)`, which has an
/// exact discrete inverse in [`correlation_from_spectrum`].
pub fn spectrum_from_correlation(c: &Correlation) -> Result<SpectralDensity, NoiseError> {
    match c {
        Correlation::Exponential { variance, tau_c } => {
            if !tau_c.is_finite() {
                return Ok(SpectralDensity::Static { variance: *variance });
            }
            let s = SpectralDensity::Lorentzian {
                variance: *variance,
                tau_c: *tau_c,
            };
            s.validate()?;
            Ok(s)
        }
        Correlation::Delta { s0 } => {
            let s = SpectralDensity::White { s0: *s0 };
            s.validate()?;
            Ok(s)
        }
        Correlation::Constant { variance } => Ok(SpectralDensity::Static { variance: *variance }),
        Correlation::Tabulated { dtau, values } => {
            if values.len() < 2 || !(*dtau > 0.0) {
                return Err(NoiseError::InvalidParams("tabulated correlation needs two or more samples and Δτ > 0".into()));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(NoiseError::Divergent("correlation samples must be finite".into()));
            }
            let tail = values[values.len() - 1].abs();
            let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if tail > 1e-3 * peak {
                return Err(NoiseError::Divergent(format!(
                    "correlation has not decayed at the end of the grid ({tail:e} of peak {peak:e})"
                )));
            }
            let n = values.len();
            let dw = PI / ((n - 1) as f64 * dtau);
            let s: Vec<f64> = dct1(values).into_iter().map(|v| 2.0 * dtau * v).collect();
            Ok(SpectralDensity::Tabulated {
                omega: (0..n).map(|j| j as f64 * dw).collect(),
                // small negative values from truncation are clipped
                values: s.into_iter().map(|v| v.max(0.0)).collect(),
            })
        }
    }
}

/// Inverse of the tabulated transform: `C(τ_k) = (Δω/π) Σ'' S_j cos(ω_j τ_k)`
/// on `τ_k = kπ/((N-1)Δω)`. The spectrum grid must be uniform and start at 0.
pub fn correlation_from_spectrum(s: &SpectralDensity) -> Result<Correlation, NoiseError> {
    match s {
        SpectralDensity::White { s0 } => Ok(Correlation::Delta { s0: *s0 }),
        SpectralDensity::Lorentzian { variance, tau_c } => Ok(Correlation::Exponential {
            variance: *variance,
            tau_c: *tau_c,
        }),
        SpectralDensity::Static { variance } => Ok(Correlation::Constant { variance: *variance }),
        SpectralDensity::Tabulated { omega, values } => {
            s.validate()?;
            let n = omega.len();
            let dw = omega[1] - omega[0];
            if omega[0] != 0.0 || omega.iter().enumerate().any(|(j, w)| (w - j as f64 * dw).abs() > 1e-9 * dw * n as f64) {
                return Err(NoiseError::InvalidParams("inverse transform needs a uniform ω grid starting at 0".into()));
            }
            let dtau = PI / ((n - 1) as f64 * dw);
            Ok(Correlation::Tabulated {
                dtau,
                values: dct1(values).into_iter().map(|v| v * dw / PI).collect(),
            })
        }
    }
}

/// Two-column `ω S` text. The first non-comment line is a unit header and is
/// skipped; `#` starts a comment.
pub fn parse_spectrum(text: &str, source_name: &str) -> Result<SpectralDensity, NoiseError> {
    let mut omega = Vec::new();
    let mut values = Vec::new();
    let mut header_seen = false;
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let err = |msg: String| NoiseError::Parse {
            source_name: source_name.to_string(),
            line: k + 1,
            msg,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(format!("expected 2 columns, found {}", fields.len())));
        }
        let parse = |f: &str| f.parse::<f64>().map_err(|e| err(format!("'{f}': {e}")));
        omega.push(parse(fields[0])?);
        values.push(parse(fields[1])?);
    }
    let s = SpectralDensity::Tabulated { omega, values };
    s.validate()?;
    Ok(s)
}
