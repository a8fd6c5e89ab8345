use nalgebra::{Matrix2, Vector2};

use super::CceError;

/// Stretched-exponential fit `|L| = exp(-(t/T2)^n)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct FitResult {
    /// ms
    pub t2: f64,
    pub n: f64,
    /// Root-mean-square residual in |L|.
    pub residual: f64,
    pub iterations: usize,
}

/// Time at which `y` first falls to `1/e`, by linear interpolation.
fn one_over_e_crossing(t: &[f64], y: &[f64]) -> Option<f64> {
    let target = (-1.0f64).exp();
    for k in 1..t.len() {
        if y[k] <= target && y[k - 1] > target {
            let f = (y[k - 1] - target) / (y[k - 1] - y[k]);
            return Some(t[k - 1] + f * (t[k] - t[k - 1]));
        }
    }
    None
}

fn model(t: f64, t2: f64, n: f64) -> f64 {
    (-(t / t2).powf(n)).exp()
}

fn sum_sq(t: &[f64], y: &[f64], t2: f64, n: f64) -> f64 {
    t.iter().zip(y).map(|(&ti, &yi)| (yi - model(ti, t2, n)).powi(2)).sum()
}

/// Levenberg–Marquardt least squares of `|L(t)|` against
/// `exp(-(t/T2)^n)`. Starts from `T2` at the `1/e` crossing and `n = 1`;
/// stops when the relative parameter step falls below `1e-10`.
pub fn fit_stretched(times: &[f64], abs_l: &[f64]) -> Result<FitResult, CceError> {
    if times.len() != abs_l.len() || times.len() < 3 {
        return Err(CceError::FitDiverged("need at least three matching samples".into()));
    }
    let Some(t_cross) = one_over_e_crossing(times, abs_l) else {
        return Err(CceError::InsufficientDecay {
            min_abs: abs_l.iter().copied().fold(f64::INFINITY, f64::min),
            t_max: times.last().copied().unwrap_or(0.0),
        });
    };
    let (t, y): (Vec<f64>, Vec<f64>) = times.iter().zip(abs_l).filter(|(&ti, _)| ti > 0.0).map(|(a, b)| (*a, *b)).unzip();

    // parametrize by logs so that T2, n stay positive
    let mut p = Vector2::new(t_cross.ln(), 0.0);
    let mut lambda = 1e-3;
    let mut cost = sum_sq(&t, &y, p[0].exp(), p[1].exp());
    for iter in 1..=500 {
        let (t2, n) = (p[0].exp(), p[1].exp());
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (&ti, &yi) in t.iter().zip(&y) {
            let x = ti / t2;
            let xn = x.powf(n);
            let m = (-xn).exp();
            // ∂m/∂ln T2 = m n xⁿ, ∂m/∂ln n = -m xⁿ n ln x
            let j = Vector2::new(m * n * xn, -m * xn * n * x.ln());
            jtj += j * j.transpose();
            jtr += j * (yi - m);
        }
        let mut accepted = false;
        for _ in 0..60 {
            let a = jtj + Matrix2::from_diagonal(&jtj.diagonal()) * lambda;
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial = p + step;
            let c = sum_sq(&t, &y, trial[0].exp(), trial[1].exp());
            if c.is_finite() && c <= cost {
                let small = step.abs().max() < 1e-10;
                p = trial;
                cost = c;
                lambda = (lambda / 3.0).max(1e-15);
                accepted = true;
                if small {
                    return Ok(finish(&t, &y, p, iter));
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no downhill step left: converged to machine precision
            return Ok(finish(&t, &y, p, iter));
        }
    }
    Err(CceError::FitDiverged("no convergence in 500 iterations".into()))
}

fn finish(t: &[f64], y: &[f64], p: Vector2<f64>, iterations: usize) -> FitResult {
    let (t2, n) = (p[0].exp(), p[1].exp());
    FitResult {
        t2,
        n,
        residual: (sum_sq(t, y, t2, n) / t.len() as f64).sqrt(),
        iterations,
    }
}
