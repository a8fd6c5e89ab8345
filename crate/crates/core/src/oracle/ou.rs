use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::cce::PulseSequence;
use crate::linalg::C64;

const CHUNK: usize = 1024;

/// `τc² (x − 1 + e^{−x})`-type combinations lose precision for small `x`;
/// this is `x − 1 + e^{−x}` evaluated stably.
fn x_minus_one_plus_exp(x: f64) -> f64 {
    if x < 1e-3 {
        x * x / 2.0 - x * x * x / 6.0 + x.powi(4) / 24.0
    } else {
        x + (-x).exp_m1()
    }
}

/// One Ornstein–Uhlenbeck trajectory per time point: `ν(0) ~ N(0, ⟨ν²⟩)`,
/// then for each sign segment `[a, b]` the endpoint `ν(b)` is drawn exactly
/// given `ν(a)`, and the segment integral enters through its exact
/// conditional mean and variance given both endpoints. Returns
/// `E[e^{−iφ} | ν at the segment ends]`.
fn trajectory(variance: f64, tau_c: f64, pulses: &PulseSequence, times: &[f64], rng: &mut ChaCha20Rng) -> Vec<C64> {
    let sd = variance.sqrt();
    times
        .iter()
        .map(|&t| {
            let mut nu = sd * { let z: f64 = StandardNormal.sample(rng); z };
            let mut mean = 0.0;
            let mut var = 0.0;
            for (k, dur) in pulses.segments(t).into_iter().enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                if dur == 0.0 {
                    continue;
                }
                if !tau_c.is_finite() {
                    mean += sign * nu * dur;
                    continue;
                }
                let x = dur / tau_c;
                let rho = (-x).exp();
                let one_minus = -(-x).exp_m1();
                let v_end = variance * one_minus * (1.0 + rho);
                let v_int = variance * tau_c * tau_c * (2.0 * x_minus_one_plus_exp(x) - one_minus * one_minus);
                let cov = variance * tau_c * one_minus * one_minus;
                let m_int = nu * tau_c * one_minus;
                let next = nu * rho + v_end.sqrt() * { let z: f64 = StandardNormal.sample(rng); z };
                let (cm, cv) = if v_end > 0.0 {
                    (m_int + cov / v_end * (next - nu * rho), (v_int - cov * cov / v_end).max(0.0))
                } else {
                    (m_int, v_int.max(0.0))
                };
                mean += sign * cm;
                var += cv;
                nu = next;
            }
            C64::from_polar((-var / 2.0).exp(), -mean)
        })
        .collect()
}

/// `⟨e^{−iφ}⟩` with `φ = ∫₀ᵗ y(τ) ν(τ) dτ` over `m` Ornstein–Uhlenbeck
/// trajectories of variance `⟨ν²⟩` and correlation time `τc` (infinite for
/// static noise). Trajectory `j` uses ChaCha20 seeded with `seed`, stream
/// `j`; chunks are reduced in a fixed order.
pub fn ou_monte_carlo(variance: f64, tau_c: f64, pulses: &PulseSequence, times: &[f64], m: usize, seed: u64) -> Vec<C64> {
    let n = times.len();
    let chunks: Vec<Vec<C64>> = (0..m.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![C64::new(0.0, 0.0); n];
            for j in c * CHUNK..((c + 1) * CHUNK).min(m) {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(j as u64);
                for (a, v) in acc.iter_mut().zip(trajectory(variance, tau_c, pulses, times, &mut rng)) {
                    *a += v;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![C64::new(0.0, 0.0); n];
    for c in chunks {
        total.iter_mut().zip(c).for_each(|(a, v)| *a += v);
    }
    let scale = 1.0 / m.max(1) as f64;
    total.into_iter().map(|v| v * scale).collect()
}
