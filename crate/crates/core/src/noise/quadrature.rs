use super::NoiseError;

pub const DEFAULT_REL_TOL: f64 = 1e-8;
const MAX_INTERVALS: usize = 5000;

// Gauss–Kronrod 7/15 nodes on [-1, 1] (non-negative half) and weights.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XK[j];
        let s = f(c - x) + f(c + x);
        k += WK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod 7/15 on `[a, b]`, bisecting the interval with the
/// largest error until the total error is below `rel_tol·|I|` or `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral, NoiseError> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    loop {
        let value: f64 = parts.iter().map(|p| p.2).sum();
        let error: f64 = parts.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(NoiseError::Quadrature {
                msg: "integrand is not finite".into(),
                estimate: value,
                error,
            });
        }
        if error <= (rel_tol * value.abs()).max(abs_tol) {
            return Ok(Integral {
                value,
                error,
                intervals: parts.len(),
            });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(NoiseError::Quadrature {
                msg: format!("{MAX_INTERVALS} subintervals exhausted"),
                estimate: value,
                error,
            });
        }
        let (k, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = parts.swap_remove(k);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(NoiseError::Quadrature {
                msg: "interval cannot be bisected further".into(),
                estimate: value,
                error,
            });
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        parts.push((lo, mid, v1, e1));
        parts.push((mid, hi, v2, e2));
    }
}

/// `∫_a^∞ f` through `ω = a + u/(1 - u)`, `u ∈ [0, 1)`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, rel_tol: f64, abs_tol: f64) -> Result<Integral, NoiseError> {
    integrate(
        |u| {
            if u >= 1.0 {
                return 0.0;
            }
            let d = 1.0 - u;
            f(a + u / d) / (d * d)
        },
        0.0,
        1.0,
        rel_tol,
        abs_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, 1e-12, 0.0).unwrap();
        assert!((r.value - (8.0 + 1.0 - 1.5 + 6.0)).abs() < 1e-12);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn oscillatory_and_peaked() {
        let r = integrate(|x| (50.0 * x).cos(), 0.0, 3.0, 1e-10, 0.0).unwrap();
        assert!((r.value - (150.0f64).sin() / 50.0).abs() < 1e-10);
        let r = integrate(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-10, 0.0).unwrap();
        let exact = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((r.value / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn semi_infinite_lorentzian() {
        let tau = 0.3;
        let r = integrate_semi_infinite(|w| 1.0 / (1.0 + (w * tau).powi(2)), 0.0, 1e-10, 0.0).unwrap();
        assert!((r.value - std::f64::consts::FRAC_PI_2 / tau).abs() < 1e-8);
    }

    #[test]
    fn reports_failure() {
        assert!(matches!(
            integrate(|x| 1.0 / x, 0.0, 1.0, 1e-12, 0.0),
            Err(NoiseError::Quadrature { .. })
        ));
    }
}
