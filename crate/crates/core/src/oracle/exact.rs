use std::collections::HashMap;

use nalgebra::DVector;

use crate::cce::{PulseSequence, QubitLevels};
use crate::linalg::{matmul, CMatrix, C64};
use crate::spinops::ClusterAssembly;

use super::expm::expm_taylor;
use super::{OracleError, OracleLimits};

/// Central spin plus bath on the joint space (central index first).
#[derive(Debug, Clone)]
pub struct JointSystem {
    pub h: CMatrix,
    /// Central-spin Hamiltonian alone, for the bath-free reference.
    pub hs: CMatrix,
    pub bath_dim: usize,
    pub rho_bath: CMatrix,
    pub levels: QubitLevels,
}

impl JointSystem {
    pub fn from_assembly(asm: &ClusterAssembly, levels: QubitLevels, rho_bath: CMatrix) -> Result<Self, OracleError> {
        let Some((_, hs)) = &asm.central else {
            return Err(OracleError::InvalidInput("assembly has no central spin".into()));
        };
        Ok(Self {
            h: asm.full().matrix,
            hs: hs.clone(),
            bath_dim: asm.bath_dim(),
            rho_bath,
            levels,
        })
    }

    fn central_dim(&self) -> usize {
        self.hs.nrows()
    }
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// `|0⟩⟨1| + |1⟩⟨0|` plus the identity outside the qubit subspace.
fn swap_operator(levels: &QubitLevels) -> CMatrix {
    let v0 = &levels.states[0];
    let v1 = &levels.states[1];
    let n = v0.len();
    CMatrix::identity(n, n) - v0 * v0.adjoint() - v1 * v1.adjoint() + v0 * v1.adjoint() + v1 * v0.adjoint()
}

/// Propagators `e^{G nδ}` for integer `n` by binary powering of `e^{Gδ}`.
struct Powers {
    squares: Vec<CMatrix>,
    memo: HashMap<u64, CMatrix>,
}

impl Powers {
    fn new(base: CMatrix) -> Self {
        Self {
            squares: vec![base],
            memo: HashMap::new(),
        }
    }

    /// `base^n`, continued from the largest power already computed below
    /// `n` (so ascending requests cost one or two products each).
    fn get(&mut self, n: u64) -> CMatrix {
        if let Some(m) = self.memo.get(&n) {
            return m.clone();
        }
        let start = self.memo.keys().copied().filter(|&m| m < n).max();
        let d = self.squares[0].nrows();
        let (mut out, mut k) = match start {
            Some(m) => (self.memo[&m].clone(), n - m),
            None => (CMatrix::identity(d, d), n),
        };
        let mut j = 0;
        while k > 0 {
            while self.squares.len() <= j {
                let last = self.squares.last().expect("non-empty");
                let sq = matmul(last, last);
                self.squares.push(sq);
            }
            if k & 1 == 1 {
                out = matmul(&out, &self.squares[j]);
            }
            k >>= 1;
            j += 1;
        }
        self.memo.insert(n, out.clone());
        out
    }
}

/// Segment propagators for every time: either integer powers of one base step
/// (uniform grid with rational pulse fractions) or direct exponentials.
struct Segments {
    plan: Option<(f64, Vec<Vec<u64>>)>,
}

impl Segments {
    fn plan(pulses: &PulseSequence, times: &[f64]) -> Self {
        let n = times.len();
        if n < 2 || times[0] != 0.0 {
            return Self { plan: None };
        }
        let dt = times[1];
        if times.iter().enumerate().any(|(k, t)| (t - k as f64 * dt).abs() > 1e-12 * t.max(dt)) {
            return Self { plan: None };
        }
        let mut edges = vec![0.0];
        edges.extend_from_slice(pulses.fractions());
        edges.push(1.0);
        let q = (1..=64u64).find(|&q| {
            edges
                .iter()
                .all(|f| (f * q as f64 - (f * q as f64).round()).abs() < 1e-9)
        });
        let Some(q) = q else { return Self { plan: None } };
        let counts = (0..n as u64)
            .map(|k| {
                edges
                    .windows(2)
                    .map(|w| ((w[1] - w[0]) * q as f64).round() as u64 * k)
                    .collect()
            })
            .collect();
        Self {
            plan: Some((dt / q as f64, counts)),
        }
    }
}

/// Evolves `x0` (states as columns, or a vectorized density) through the
/// pulse sequence with generator `g` (segment propagator `e^{gτ}`), applying
/// `pulse` between segments.
fn run_sequence(
    g: &CMatrix,
    pulse: &dyn Fn(&CMatrix) -> CMatrix,
    x0: &CMatrix,
    pulses: &PulseSequence,
    times: &[f64],
) -> Vec<CMatrix> {
    let seg = Segments::plan(pulses, times);
    let mut powers = seg.plan.as_ref().map(|(delta, _)| Powers::new(expm_taylor(&(g * C64::new(*delta, 0.0)))));
    times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut x = x0.clone();
            let durations = pulses.segments(t);
            let last = durations.len() - 1;
            for (i, tau) in durations.into_iter().enumerate() {
                let u = match (&seg.plan, powers.as_mut()) {
                    (Some((_, counts)), Some(p)) => p.get(counts[k][i]),
                    _ => expm_taylor(&(g * C64::new(tau, 0.0))),
                };
                x = matmul(&u, &x);
                if i < last {
                    x = pulse(&x);
                }
            }
            x
        })
        .collect()
}

/// `(P ⊗ 1_B) x` for `x` with `P.ncols()·db` rows.
fn apply_central(p: &CMatrix, x: &CMatrix, db: usize) -> CMatrix {
    let mut out = CMatrix::zeros(p.nrows() * db, x.ncols());
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let c = p[(i, j)];
            if c != C64::new(0.0, 0.0) {
                let src = x.rows(j * db, db) * c;
                let mut dst = out.rows_mut(i * db, db);
                dst += src;
            }
        }
    }
    out
}

/// `⟨a| Tr_B ρ |b⟩` with `(a, b) = (0, 1)` for an even and `(1, 0)` for an
/// odd pulse count.
fn readout(rho: &CMatrix, ds: usize, db: usize, levels: &QubitLevels, pulses: &PulseSequence) -> C64 {
    let mut rs = CMatrix::zeros(ds, ds);
    for i in 0..ds {
        for j in 0..ds {
            rs[(i, j)] = (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum();
        }
    }
    let (a, b) = if pulses.count() % 2 == 0 { (0, 1) } else { (1, 0) };
    (levels.states[a].adjoint() * rs * &levels.states[b])[(0, 0)]
}

fn initial_state(levels: &QubitLevels, rho_bath: &CMatrix) -> CMatrix {
    let psi: DVector<C64> = (&levels.states[0] + &levels.states[1]) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    kron(&(&psi * psi.adjoint()), rho_bath)
}

fn check(sys: &JointSystem, limit: usize) -> Result<usize, OracleError> {
    let d = sys.h.nrows();
    if d > limit {
        return Err(OracleError::DimensionOverflow { dim: d, limit });
    }
    if d != sys.central_dim() * sys.bath_dim || sys.rho_bath.nrows() != sys.bath_dim {
        return Err(OracleError::InvalidInput("joint, central and bath dimensions disagree".into()));
    }
    Ok(d)
}

/// Propagates `X = U (|ψ⟩ ⊗ 1_B)` and reads out `Tr[W_a ρ_B W_b†]` with
/// `W_α = (⟨α| ⊗ 1_B) X`, which equals `⟨a| Tr_B(U ρ₀ U†) |b⟩`.
fn unitary_readouts(
    h: &CMatrix,
    rho_bath: &CMatrix,
    ds: usize,
    db: usize,
    levels: &QubitLevels,
    pulses: &PulseSequence,
    times: &[f64],
) -> Vec<C64> {
    let g = h * C64::new(0.0, -1.0);
    let swap = swap_operator(levels);
    let pulse = |x: &CMatrix| apply_central(&swap, x, db);
    let psi: DVector<C64> = (&levels.states[0] + &levels.states[1]) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let x0 = kron(&CMatrix::from_column_slice(ds, 1, psi.as_slice()), &CMatrix::identity(db, db));
    let (a, b) = if pulses.count() % 2 == 0 { (0, 1) } else { (1, 0) };
    run_sequence(&g, &pulse, &x0, pulses, times)
        .into_iter()
        .map(|x| {
            let wa = apply_central(&CMatrix::from_row_slice(1, ds, levels.states[a].adjoint().as_slice()), &x, db);
            let wb = apply_central(&CMatrix::from_row_slice(1, ds, levels.states[b].adjoint().as_slice()), &x, db);
            // Tr[A B†] elementwise
            matmul(&wa, rho_bath).iter().zip(wb.iter()).map(|(x, y)| x * y.conj()).sum()
        })
        .collect()
}

fn reference(sys: &JointSystem, pulses: &PulseSequence, times: &[f64]) -> Result<Vec<C64>, OracleError> {
    let one = CMatrix::identity(1, 1);
    let r = unitary_readouts(&sys.hs, &one, sys.central_dim(), 1, &sys.levels, pulses, times);
    if let Some(k) = r.iter().position(|v| v.norm() < 1e-12) {
        return Err(OracleError::VanishingReference(times[k]));
    }
    Ok(r)
}

/// Coherence of the central spin from exact propagation of the joint
/// Hamiltonian with explicit π-pulse operators, divided by the bath-free
/// reference evolution.
pub fn exact_coherence(
    sys: &JointSystem,
    pulses: &PulseSequence,
    times: &[f64],
    limits: &OracleLimits,
) -> Result<Vec<C64>, OracleError> {
    check(sys, limits.max_unitary_dim)?;
    let raw = unitary_readouts(&sys.h, &sys.rho_bath, sys.central_dim(), sys.bath_dim, &sys.levels, pulses, times);
    let r = reference(sys, pulses, times)?;
    Ok(raw.into_iter().zip(r).map(|(a, b)| a / b).collect())
}

/// Column-stacking Lindblad superoperator.
fn liouvillian(h: &CMatrix, jumps: &[(CMatrix, f64)]) -> CMatrix {
    let d = h.nrows();
    let id = CMatrix::identity(d, d);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * C64::new(0.0, -1.0);
    for (op, rate) in jumps {
        let n = op.adjoint() * op;
        l += (kron(&op.conjugate(), op) - kron(&id, &n) * C64::new(0.5, 0.0) - kron(&n.transpose(), &id) * C64::new(0.5, 0.0))
            * C64::new(*rate, 0.0);
    }
    l
}

/// Joint-space master-equation evolution of `ρ = |ψ⟩⟨ψ| ⊗ ρ_B` with jump
/// operators given on the joint space, read out and normalized like
/// [`exact_coherence`]. Also returns `Tr ρ(t)`.
pub fn exact_lindblad(
    sys: &JointSystem,
    jumps: &[(CMatrix, f64)],
    pulses: &PulseSequence,
    times: &[f64],
    limits: &OracleLimits,
) -> Result<(Vec<C64>, Vec<C64>), OracleError> {
    let d = check(sys, limits.max_lindblad_dim)?;
    if let Some((_, r)) = jumps.iter().find(|(_, r)| !(*r >= 0.0)) {
        return Err(OracleError::NegativeRate(*r));
    }
    if jumps.iter().any(|(l, _)| l.nrows() != d) {
        return Err(OracleError::InvalidInput("jump operators must act on the joint space".into()));
    }
    let g = liouvillian(&sys.h, jumps);
    let p = kron(&swap_operator(&sys.levels), &CMatrix::identity(sys.bath_dim, sys.bath_dim));
    let pulse = kron(&p.conjugate(), &p);
    let rho0 = initial_state(&sys.levels, &sys.rho_bath);
    let x0 = CMatrix::from_column_slice(d * d, 1, rho0.as_slice());
    let states = run_sequence(&g, &|x: &CMatrix| &pulse * x, &x0, pulses, times);
    let r = reference(sys, pulses, times)?;
    let mut values = Vec::with_capacity(times.len());
    let mut traces = Vec::with_capacity(times.len());
    for (x, rf) in states.into_iter().zip(r) {
        let rho = CMatrix::from_column_slice(d, d, x.as_slice());
        traces.push(rho.trace());
        values.push(readout(&rho, sys.central_dim(), sys.bath_dim, &sys.levels, pulses) / rf);
    }
    Ok((values, traces))
}

/// `Re Tr[ρ X(t) X]` with `X(t) = e^{iHt} X e^{-iHt}`.
pub fn exact_autocorrelation(
    h: &CMatrix,
    x: &CMatrix,
    rho: &CMatrix,
    times: &[f64],
    limits: &OracleLimits,
) -> Result<Vec<f64>, OracleError> {
    let d = h.nrows();
    if d > limits.max_unitary_dim {
        return Err(OracleError::DimensionOverflow {
            dim: d,
            limit: limits.max_unitary_dim,
        });
    }
    let us = run_sequence(
        &(h * C64::new(0.0, -1.0)),
        &|x: &CMatrix| x.clone(),
        &CMatrix::identity(d, d),
        &PulseSequence::ramsey(),
        times,
    );
    Ok(us
        .into_iter()
        .map(|u| (rho * u.adjoint() * x * &u * x).trace().re)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cce::select_levels;
    use crate::spinops::{build_spin_operators, LevelSelector, Spin};

    fn half_levels() -> QubitLevels {
        let z = build_spin_operators(Spin::HALF).z;
        select_levels(LevelSelector::Sz(0.5, -0.5), Spin::HALF, &z).unwrap()
    }

    fn secular_pair(azz: f64) -> JointSystem {
        let o = build_spin_operators(Spin::HALF);
        let h = kron(&o.z, &o.z) * C64::new(azz, 0.0) + kron(&o.z, &CMatrix::identity(2, 2)) * C64::new(5.0, 0.0);
        JointSystem {
            h,
            hs: &o.z * C64::new(5.0, 0.0),
            bath_dim: 2,
            rho_bath: CMatrix::identity(2, 2) * C64::new(0.5, 0.0),
            levels: half_levels(),
        }
    }

    #[test]
    fn single_secular_spin_ramsey() {
        let azz = 2.2;
        let sys = secular_pair(azz);
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 0.1).collect();
        let l = exact_coherence(&sys, &PulseSequence::ramsey(), &times, &OracleLimits::default()).unwrap();
        for (t, v) in times.iter().zip(&l) {
            assert!((v - C64::new((azz * t / 2.0).cos(), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn non_uniform_grid_matches_uniform() {
        let sys = secular_pair(1.1);
        let uniform: Vec<f64> = (0..10).map(|k| k as f64 * 0.3).collect();
        let shuffled: Vec<f64> = vec![0.3, 0.6, 1.5, 2.7];
        let a = exact_coherence(&sys, &PulseSequence::cpmg(3).unwrap(), &uniform, &OracleLimits::default()).unwrap();
        let b = exact_coherence(&sys, &PulseSequence::cpmg(3).unwrap(), &shuffled, &OracleLimits::default()).unwrap();
        for (t, v) in shuffled.iter().zip(&b) {
            let k = (t / 0.3f64).round() as usize;
            assert!((a[k] - v).norm() < 1e-11);
        }
    }

    #[test]
    fn empty_bath_is_one() {
        let o = build_spin_operators(Spin::HALF);
        let sys = JointSystem {
            h: &o.z * C64::new(3.0, 0.0) + &o.x * C64::new(0.4, 0.0),
            hs: &o.z * C64::new(3.0, 0.0) + &o.x * C64::new(0.4, 0.0),
            bath_dim: 1,
            rho_bath: CMatrix::identity(1, 1),
            levels: half_levels(),
        };
        let l = exact_coherence(&sys, &PulseSequence::hahn(), &[0.0, 0.5, 1.0], &OracleLimits::default()).unwrap();
        assert!(l.iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn zero_rates_match_unitary_and_preserve_trace() {
        let sys = secular_pair(0.8);
        let o = build_spin_operators(Spin::HALF);
        let jump = kron(&CMatrix::identity(2, 2), &o.x);
        let times: Vec<f64> = (0..12).map(|k| k as f64 * 0.25).collect();
        let (l, _) = exact_lindblad(&sys, &[(jump.clone(), 0.0)], &PulseSequence::hahn(), &times, &OracleLimits::default()).unwrap();
        let u = exact_coherence(&sys, &PulseSequence::hahn(), &times, &OracleLimits::default()).unwrap();
        for (a, b) in l.iter().zip(&u) {
            assert!((a - b).norm() < 1e-10);
        }
        let (_, tr) = exact_lindblad(&sys, &[(jump, 0.9)], &PulseSequence::hahn(), &times, &OracleLimits::default()).unwrap();
        assert!(tr.iter().all(|t| (t - C64::new(1.0, 0.0)).norm() < 1e-10));
    }

    #[test]
    fn limits_enforced() {
        let sys = secular_pair(1.0);
        let tight = OracleLimits {
            max_unitary_dim: 2,
            max_lindblad_dim: 2,
        };
        assert!(matches!(
            exact_coherence(&sys, &PulseSequence::ramsey(), &[0.0], &tight),
            Err(OracleError::DimensionOverflow { dim: 4, limit: 2 })
        ));
        assert!(matches!(
            exact_lindblad(&sys, &[], &PulseSequence::ramsey(), &[0.0], &OracleLimits::default()).map(|_| ()),
            Ok(())
        ));
        let o = build_spin_operators(Spin::HALF);
        assert!(matches!(
            exact_lindblad(&sys, &[(kron(&o.z, &o.z), -1.0)], &PulseSequence::ramsey(), &[0.0], &OracleLimits::default()),
            Err(OracleError::NegativeRate(_))
        ));
    }
}
