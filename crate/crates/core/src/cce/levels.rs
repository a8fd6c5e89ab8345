use nalgebra::DVector;

use crate::linalg::{CMatrix, HermitianEigen, C64};
use crate::spinops::{build_spin_operators, CentralSpin, LevelSelector, Spin, SpinOperators};

use super::CceError;

/// The two central-spin states spanning the qubit.
#[derive(Debug, Clone)]
pub struct QubitLevels {
    pub states: [DVector<C64>; 2],
    /// `⟨α|H_S|α⟩`, rad/ms.
    pub energies: [f64; 2],
}

impl QubitLevels {
    pub fn omega(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn check_orthonormal(&self, tol: f64) -> Result<(), CceError> {
        let [a, b] = &self.states;
        let n0 = (a.dotc(a).re - 1.0).abs();
        let n1 = (b.dotc(b).re - 1.0).abs();
        let o = a.dotc(b).norm();
        if n0 > tol || n1 > tol || o > tol {
            return Err(CceError::NonOrthonormalLevels(n0.max(n1).max(o)));
        }
        Ok(())
    }

    /// `⟨α|S_a|α⟩` for both levels.
    pub fn spin_expectations(&self, ops: &SpinOperators) -> [[f64; 3]; 2] {
        let mut out = [[0.0; 3]; 2];
        for (alpha, v) in self.states.iter().enumerate() {
            for a in 0..3 {
                out[alpha][a] = v.dotc(&(ops.component(a) * v)).re;
            }
        }
        out
    }

    /// `P = |0⟩⟨1| + |1⟩⟨0| + (1 - |0⟩⟨0| - |1⟩⟨1|)`: an ideal π-pulse on the
    /// qubit that leaves the other central levels alone.
    pub fn pi_pulse(&self) -> CMatrix {
        let [a, b] = &self.states;
        let d = a.len();
        let pa = a * a.adjoint();
        let pb = b * b.adjoint();
        CMatrix::identity(d, d) - &pa - &pb + a * b.adjoint() + b * a.adjoint()
    }
}

fn basis_vector(d: usize, k: usize) -> DVector<C64> {
    let mut v = DVector::from_element(d, C64::new(0.0, 0.0));
    v[k] = C64::new(1.0, 0.0);
    v
}

fn expectation(h: &CMatrix, v: &DVector<C64>) -> f64 {
    v.dotc(&(h * v)).re
}

/// Resolves a level selector against a central Hamiltonian `hs`.
pub fn select_levels(selector: LevelSelector, s: Spin, hs: &CMatrix) -> Result<QubitLevels, CceError> {
    let (m0, m1) = selector.labels();
    let d = s.dim();
    let idx = |m: f64| s.index_of_m(m).ok_or(CceError::InvalidLevels(format!("m = {m} not a projection of spin {s}")));
    let (k0, k1) = (idx(m0)?, idx(m1)?);
    if k0 == k1 {
        return Err(CceError::InvalidLevels("qubit levels must differ".into()));
    }
    let states = match selector {
        LevelSelector::Sz(..) => [basis_vector(d, k0), basis_vector(d, k1)],
        LevelSelector::Eigen(..) => continue_levels(s, hs, [k0, k1]),
    };
    let levels = QubitLevels {
        energies: [expectation(hs, &states[0]), expectation(hs, &states[1])],
        states,
    };
    levels.check_orthonormal(1e-10)?;
    Ok(levels)
}

/// Follows the `Sz` eigenstates `ks` of `hs + f Sz` from a dominating `f`
/// down to `f = 0`, matching by overlap. Inside a degenerate eigenspace the
/// tracked vector is projected onto the space, which fixes the choice
/// deterministically.
fn continue_levels(s: Spin, hs: &CMatrix, ks: [usize; 2]) -> [DVector<C64>; 2] {
    let d = s.dim();
    let ops = build_spin_operators(s);
    let scale = hs.norm() + 1.0;
    let mut f = 1e4 * scale;
    let f_min = 1e-9 * scale;
    let mut tracked = ks.map(|k| basis_vector(d, k));
    let mut ratio: f64 = 0.9;
    while f > 0.0 {
        let mut next = if f * ratio < f_min { 0.0 } else { f * ratio };
        loop {
            let h = hs + &ops.z * C64::new(next, 0.0);
            let moved = tracked.clone().map(|v| follow(&h, &v, scale));
            let worst = moved
                .iter()
                .zip(&tracked)
                .map(|(a, b)| a.dotc(b).norm())
                .fold(1.0f64, f64::min);
            // small steps across avoided crossings keep the following adiabatic
            if worst > 0.999 || next >= f * 0.999999 {
                tracked = moved;
                break;
            }
            ratio = 1.0 - (1.0 - ratio) / 2.0;
            next = f * ratio;
        }
        f = next;
        ratio = (1.0 - 2.0 * (1.0 - ratio)).max(0.5);
    }
    // re-orthonormalise against round-off
    let [a, b] = tracked;
    let a = a.normalize();
    let b = (&b - &a * a.dotc(&b)).normalize();
    [a, b]
}

fn follow(h: &CMatrix, v: &DVector<C64>, scale: f64) -> DVector<C64> {
    let eig = HermitianEigen::new(h);
    let order = eig.sorted();
    let tol = 1e-9 * scale;
    let mut best: Option<(f64, DVector<C64>)> = None;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && order[end].1 - order[end - 1].1 <= tol {
            end += 1;
        }
        let mut proj = DVector::from_element(v.len(), C64::new(0.0, 0.0));
        for &(col, _) in &order[start..end] {
            let u = eig.vectors.column(col);
            proj += &u * u.dotc(v);
        }
        let w = proj.norm();
        if best.as_ref().is_none_or(|(bw, _)| w > *bw) {
            best = Some((w, proj));
        }
        start = end;
    }
    let (_, p) = best.expect("non-empty spectrum");
    let mut p = p.normalize();
    let phase = p.dotc(v);
    if phase.norm() > 0.0 {
        p *= phase / phase.norm();
    }
    p
}

/// Levels of the central Hamiltonian with a static Overhauser field
/// `Σ_a f_a S_a` added (rad/ms), selected by the central spin's selector.
pub fn mean_field_levels(central: &CentralSpin, b: [f64; 3], overhauser: [f64; 3]) -> Result<QubitLevels, CceError> {
    let ops = build_spin_operators(central.s);
    let mut hs = central.hamiltonian(b)?;
    for (a, &f) in overhauser.iter().enumerate() {
        if f != 0.0 {
            hs += ops.component(a) * C64::new(f, 0.0);
        }
    }
    select_levels(central.levels, central.s, &hs)
}
