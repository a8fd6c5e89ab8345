use crate::cce::PulseSequence;
use crate::linalg::C64;

/// Sign function `y(τ)` of a pulse sequence over `[0, t]`: `+1` at the start
/// and flipped at every π-pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingFunction {
    /// Segment boundaries `0 = τ₀ < τ₁ < … < τ_K = t`.
    pub boundaries: Vec<f64>,
    /// Sign on each segment.
    pub signs: Vec<f64>,
}

impl SwitchingFunction {
    pub fn value(&self, tau: f64) -> f64 {
        let k = self.boundaries[1..].partition_point(|&b| b <= tau).min(self.signs.len() - 1);
        self.signs[k]
    }

    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.boundaries.windows(2).zip(&self.signs).map(|(w, &s)| (w[0], w[1], s))
    }
}

pub fn filter_time(pulses: &PulseSequence, t: f64) -> SwitchingFunction {
    let mut boundaries = vec![0.0];
    boundaries.extend(pulses.fractions().iter().map(|f| f * t));
    boundaries.push(t);
    let signs = (0..=pulses.count()).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    SwitchingFunction { boundaries, signs }
}

/// `sin x / x`, accurate near zero.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `F(ω, t) = |ỹ(ω)|²/2`. Ramsey reduces to `2 sin²(ωt/2)/ω²` and Hahn to
/// `8 sin⁴(ωt/4)/ω²`; both are evaluated in the form `t² × (sinc terms)` so
/// that `ω → 0` needs no special case.
pub fn filter_freq(pulses: &PulseSequence, omega: f64, t: f64) -> f64 {
    match pulses.fractions() {
        [] => {
            let s = sinc(omega * t / 2.0);
            0.5 * t * t * s * s
        }
        [h] if *h == 0.5 => {
            let x = omega * t / 4.0;
            let s = sinc(x);
            0.5 * t * t * x * x * s.powi(4)
        }
        _ => {
            // ∫_a^b e^{iωτ} dτ = (b - a) e^{iω(a+b)/2} sinc(ω(b-a)/2)
            let y: C64 = filter_time(pulses, t)
                .segments()
                .map(|(a, b, s)| C64::from_polar(s * (b - a) * sinc(omega * (b - a) / 2.0), omega * (a + b) / 2.0))
                .sum();
            0.5 * y.norm_sqr()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hahn_closed(omega: f64, t: f64) -> f64 {
        8.0 * (omega * t / 4.0).sin().powi(4) / (omega * omega)
    }

    /// Direct midpoint quadrature of `∫ y(τ) e^{iωτ} dτ`.
    fn numeric(pulses: &PulseSequence, omega: f64, t: f64) -> f64 {
        let y = filter_time(pulses, t);
        let n = 20000;
        let mut acc = C64::new(0.0, 0.0);
        for (a, b, s) in y.segments() {
            let h = (b - a) / n as f64;
            for k in 0..n {
                let tau = a + (k as f64 + 0.5) * h;
                acc += C64::from_polar(s * h, omega * tau);
            }
        }
        0.5 * acc.norm_sqr()
    }

    #[test]
    fn switching_functions() {
        let r = filter_time(&PulseSequence::ramsey(), 2.0);
        assert!((0..20).all(|k| r.value(k as f64 * 0.1) == 1.0));
        let h = filter_time(&PulseSequence::hahn(), 2.0);
        assert_eq!((h.value(0.99), h.value(1.01)), (1.0, -1.0));
        let c = filter_time(&PulseSequence::cpmg(2).unwrap(), 4.0);
        assert_eq!(c.boundaries, vec![0.0, 1.0, 3.0, 4.0]);
        assert_eq!((c.value(0.5), c.value(2.0), c.value(3.5)), (1.0, -1.0, 1.0));
    }

    #[test]
    fn hahn_closed_form_pointwise() {
        let t = 1.7;
        for k in 1..=1000 {
            let w = k as f64 * 0.05;
            let f = filter_freq(&PulseSequence::hahn(), w, t);
            let c = hahn_closed(w, t);
            assert!((f - c).abs() <= 1e-12 * c.abs().max(1.0), "ω={w}: {f} vs {c}");
        }
        let w = 2.0 * std::f64::consts::PI / t;
        assert!((filter_freq(&PulseSequence::hahn(), w, t) - 8.0 / (w * w)).abs() < 1e-12);
    }

    #[test]
    fn low_frequency_limits() {
        let t = 1.3;
        let w = 1e-3;
        let h = filter_freq(&PulseSequence::hahn(), w, t);
        assert!((h / (w * w * t.powi(4) / 32.0) - 1.0).abs() < 1e-6);
        assert!((filter_freq(&PulseSequence::ramsey(), 0.0, t) - t * t / 2.0).abs() < 1e-15);
        assert_eq!(filter_freq(&PulseSequence::hahn(), 0.0, t), 0.0);
    }

    #[test]
    fn closed_forms_match_numeric_transform() {
        let t = 2.0;
        let seqs = [
            PulseSequence::ramsey(),
            PulseSequence::hahn(),
            PulseSequence::cpmg(2).unwrap(),
            PulseSequence::cpmg(4).unwrap(),
            PulseSequence::cpmg(8).unwrap(),
        ];
        for p in &seqs {
            for k in 0..25 {
                let w = 0.37 * k as f64;
                let a = filter_freq(p, w, t);
                let b = numeric(p, w, t);
                assert!((a - b).abs() < 1e-6, "{p} ω={w}: {a} vs {b}");
            }
        }
    }

    proptest! {
        #[test]
        fn nonnegative_and_even(w in -200.0f64..200.0, t in 0.01f64..10.0, n in 0usize..9) {
            let p = if n == 0 { PulseSequence::ramsey() } else { PulseSequence::cpmg(n).unwrap() };
            let f = filter_freq(&p, w, t);
            prop_assert!(f >= 0.0);
            prop_assert!((f - filter_freq(&p, -w, t)).abs() <= 1e-12 * f.max(1e-300));
        }
    }
}
