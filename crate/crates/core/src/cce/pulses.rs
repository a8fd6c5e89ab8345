use std::fmt;

use super::CceError;

/// Instantaneous π-pulses at fixed fractions of the total evolution time.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    name: String,
    fractions: Vec<f64>,
}

impl PulseSequence {
    pub fn ramsey() -> Self {
        Self {
            name: "ramsey".into(),
            fractions: Vec::new(),
        }
    }

    pub fn hahn() -> Self {
        Self {
            name: "hahn".into(),
            fractions: vec![0.5],
        }
    }

    /// Pulses at `(2k - 1) / 2n`, `k = 1..=n`.
    pub fn cpmg(n: usize) -> Result<Self, CceError> {
        if n == 0 {
            return Err(CceError::InvalidPulses("cpmg needs at least one pulse".into()));
        }
        Ok(Self {
            name: format!("cpmg-{n}"),
            fractions: (1..=n).map(|k| (2 * k - 1) as f64 / (2 * n) as f64).collect(),
        })
    }

    pub fn custom(fractions: Vec<f64>) -> Result<Self, CceError> {
        for w in fractions.windows(2) {
            if w[1] <= w[0] {
                return Err(CceError::InvalidPulses("pulse times must be strictly increasing".into()));
            }
        }
        if fractions.iter().any(|&f| !(f > 0.0 && f < 1.0)) {
            return Err(CceError::InvalidPulses("pulse fractions must lie in (0, 1)".into()));
        }
        Ok(Self {
            name: "custom".into(),
            fractions,
        })
    }

    /// `ramsey`, `hahn`, `cpmg-N` (also `cpmgN`).
    pub fn parse(s: &str) -> Result<Self, CceError> {
        let l = s.trim().to_ascii_lowercase();
        match l.as_str() {
            "ramsey" | "fid" => Ok(Self::ramsey()),
            "hahn" | "echo" | "hahn-echo" => Ok(Self::hahn()),
            _ => {
                let rest = l
                    .strip_prefix("cpmg-")
                    .or_else(|| l.strip_prefix("cpmg"))
                    .ok_or_else(|| CceError::InvalidPulses(format!("unknown sequence `{s}`")))?;
                let n: usize = rest
                    .parse()
                    .map_err(|_| CceError::InvalidPulses(format!("unknown sequence `{s}`")))?;
                Self::cpmg(n)
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn count(&self) -> usize {
        self.fractions.len()
    }

    /// Durations of the free-evolution segments for total time `t`.
    pub fn segments(&self, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.fractions.len() + 1);
        let mut prev = 0.0;
        for &f in &self.fractions {
            out.push((f - prev) * t);
            prev = f;
        }
        out.push((1.0 - prev) * t);
        out
    }

    /// True if the pulse times are symmetric under `f -> 1 - f`.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.fractions.len();
        (0..n).all(|k| (self.fractions[k] + self.fractions[n - 1 - k] - 1.0).abs() < 1e-12)
    }
}

impl fmt::Display for PulseSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
