use super::NoiseError;

/// Magnetic field seen by the magnetization, Gauss.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldProfile {
    Constant([f64; 3]),
    /// `fields[k]` applies on `[switch[k-1], switch[k])`, with
    /// `fields.len() == switch.len() + 1`.
    Piecewise { switch: Vec<f64>, fields: Vec<[f64; 3]> },
}

impl FieldProfile {
    fn at(&self, t: f64) -> [f64; 3] {
        match self {
            FieldProfile::Constant(b) => *b,
            FieldProfile::Piecewise { switch, fields } => fields[switch.partition_point(|&s| s <= t)],
        }
    }

    fn breakpoints(&self) -> &[f64] {
        match self {
            FieldProfile::Constant(_) => &[],
            FieldProfile::Piecewise { switch, .. } => switch,
        }
    }

    fn max_norm(&self) -> f64 {
        let n = |b: &[f64; 3]| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        match self {
            FieldProfile::Constant(b) => n(b),
            FieldProfile::Piecewise { fields, .. } => fields.iter().map(n).fold(0.0, f64::max),
        }
    }
}

/// `dM/dt = γ M × B − (Mx/T2, My/T2, (Mz − M0)/T1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochParams {
    /// rad/(ms·G)
    pub gamma: f64,
    pub field: FieldProfile,
    /// ms, may be infinite
    pub t1: f64,
    /// ms, may be infinite
    pub t2: f64,
    pub m0: f64,
}

const MAX_STEPS: usize = 50_000_000;

fn rhs(p: &BlochParams, b: [f64; 3], m: [f64; 3]) -> [f64; 3] {
    let g = p.gamma;
    [
        g * (m[1] * b[2] - m[2] * b[1]) - m[0] / p.t2,
        g * (m[2] * b[0] - m[0] * b[2]) - m[1] / p.t2,
        g * (m[0] * b[1] - m[1] * b[0]) - (m[2] - p.m0) / p.t1,
    ]
}

fn axpy(m: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [m[0] + h * k[0], m[1] + h * k[1], m[2] + h * k[2]]
}

fn rk4(p: &BlochParams, b: [f64; 3], m: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = rhs(p, b, m);
    let k2 = rhs(p, b, axpy(m, h / 2.0, k1));
    let k3 = rhs(p, b, axpy(m, h / 2.0, k2));
    let k4 = rhs(p, b, axpy(m, h, k3));
    let mut out = m;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Fixed-step RK4 between breakpoints with at most `h` per step.
fn trajectory(p: &BlochParams, m_init: [f64; 3], times: &[f64], h: f64) -> Result<Vec<[f64; 3]>, NoiseError> {
    let mut stops: Vec<f64> = times.to_vec();
    stops.extend(p.field.breakpoints().iter().filter(|&&s| s > 0.0 && s < times[times.len() - 1]));
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut out = Vec::with_capacity(times.len());
    let mut m = m_init;
    let mut now = 0.0;
    let mut steps = 0;
    let mut next_out = 0;
    for &stop in &stops {
        let span = stop - now;
        if span > 0.0 {
            let n = (span / h).ceil().max(1.0) as usize;
            steps += n;
            if steps > MAX_STEPS {
                return Err(NoiseError::InvalidParams(format!("Bloch integration needs more than {MAX_STEPS} steps")));
            }
            let dt = span / n as f64;
            // field is constant between breakpoints; sample it at the midpoint
            let b = p.field.at(now + span / 2.0);
            for _ in 0..n {
                m = rk4(p, b, m, dt);
            }
            now = stop;
        }
        while next_out < times.len() && times[next_out] <= stop {
            out.push(m);
            next_out += 1;
        }
    }
    Ok(out)
}

/// Integrates the Bloch equations from `M(0) = m_init` and returns `M` at
/// every time of the ascending grid `times`. The step is halved until a
/// further halving changes no component by more than `1e-8`.
pub fn bloch_solve(params: &BlochParams, m_init: [f64; 3], times: &[f64]) -> Result<Vec<[f64; 3]>, NoiseError> {
    if !(params.t1 > 0.0) || !(params.t2 > 0.0) {
        return Err(NoiseError::InvalidParams("T1 and T2 must be positive or infinite".into()));
    }
    if m_init.iter().any(|x| !x.is_finite()) || !params.m0.is_finite() || !params.gamma.is_finite() {
        return Err(NoiseError::InvalidParams("magnetization and γ must be finite".into()));
    }
    if times.is_empty() {
        return Ok(Vec::new());
    }
    if times[0] < 0.0 || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(NoiseError::InvalidParams("times must be non-negative and strictly ascending".into()));
    }
    if let FieldProfile::Piecewise { switch, fields } = &params.field {
        if fields.len() != switch.len() + 1 || switch.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NoiseError::InvalidParams("piecewise field needs ascending switch times and one more field".into()));
        }
    }
    let t_end = times[times.len() - 1];
    let rate = (params.gamma.abs() * params.field.max_norm()).max(1.0 / params.t1).max(1.0 / params.t2);
    let mut h = if rate > 0.0 { 0.2 / rate } else { t_end.max(1e-300) };
    h = h.min(t_end.max(1e-300) / 8.0);
    let mut coarse = trajectory(params, m_init, times, h)?;
    loop {
        h /= 2.0;
        let fine = trajectory(params, m_init, times, h)?;
        let diff = coarse
            .iter()
            .zip(&fine)
            .flat_map(|(a, b)| (0..3).map(move |i| (a[i] - b[i]).abs()))
            .fold(0.0, f64::max);
        if diff < 1e-8 {
            return Ok(fine);
        }
        coarse = fine;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t1: f64, t2: f64, b: [f64; 3], m0: f64) -> BlochParams {
        BlochParams {
            gamma: 2.0,
            field: FieldProfile::Constant(b),
            t1,
            t2,
            m0,
        }
    }

    fn grid() -> Vec<f64> {
        (0..=50).map(|k| k as f64 * 0.1).collect()
    }

    #[test]
    fn free_precession() {
        let p = params(f64::INFINITY, f64::INFINITY, [0.0, 0.0, 1.5], 0.0);
        let m = bloch_solve(&p, [1.0, 0.0, 0.0], &grid()).unwrap();
        for (t, v) in grid().iter().zip(&m) {
            assert!((v[0] - (3.0 * t).cos()).abs() < 1e-7);
        }
    }

    #[test]
    fn transverse_envelope() {
        let p = params(f64::INFINITY, 1.3, [0.0, 0.0, 1.5], 0.0);
        let m = bloch_solve(&p, [1.0, 0.0, 0.0], &grid()).unwrap();
        for (t, v) in grid().iter().zip(&m) {
            assert!(((v[0] * v[0] + v[1] * v[1]).sqrt() - (-t / 1.3).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn longitudinal_recovery() {
        let p = params(0.8, 0.5, [0.0; 3], 1.0);
        let m = bloch_solve(&p, [0.0; 3], &grid()).unwrap();
        for (t, v) in grid().iter().zip(&m) {
            assert!((v[2] - (1.0 - (-t / 0.8).exp())).abs() < 1e-7);
        }
    }

    #[test]
    fn norm_non_increasing() {
        let p = params(0.9, 0.9, [0.3, -1.0, 2.0], 0.0);
        let m = bloch_solve(&p, [0.2, 0.7, -0.4], &grid()).unwrap();
        let n: Vec<f64> = m.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect();
        assert!(n.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn piecewise_field_switches() {
        // precess about z for 1 ms, then about x
        let p = BlochParams {
            gamma: 1.0,
            field: FieldProfile::Piecewise {
                switch: vec![1.0],
                fields: vec![[0.0, 0.0, std::f64::consts::PI / 2.0], [std::f64::consts::PI / 2.0, 0.0, 0.0]],
            },
            t1: f64::INFINITY,
            t2: f64::INFINITY,
            m0: 0.0,
        };
        let m = bloch_solve(&p, [1.0, 0.0, 0.0], &[0.0, 1.0, 2.0]).unwrap();
        // quarter turn about z takes x to ∓y; the next quarter about x moves it onto z
        assert!(m[1][0].abs() < 1e-7 && (m[1][1].abs() - 1.0).abs() < 1e-7);
        assert!(m[2][0].abs() < 1e-7 && m[2][1].abs() < 1e-7 && (m[2][2].abs() - 1.0).abs() < 1e-7);
    }
}
