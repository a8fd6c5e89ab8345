use crate::linalg::{hermiticity_defect, CMatrix, C64};
use crate::spinops::ClusterAssembly;

use super::{CceError, QubitLevels};

/// Bath Hamiltonians conditioned on each qubit level.
#[derive(Debug, Clone)]
pub struct ProjectedPair {
    pub h0: CMatrix,
    pub h1: CMatrix,
}

impl ProjectedPair {
    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    /// True if `[H(0), H(1)] = 0` within `tol` (relative Frobenius norm).
    pub fn commutes(&self, tol: f64) -> bool {
        let c = &self.h0 * &self.h1 - &self.h1 * &self.h0;
        c.norm() <= tol * (self.h0.norm() * self.h1.norm()).max(f64::MIN_POSITIVE)
    }
}

/// `H(α) = ⟨α|H_SB|α⟩ + H_B`. The level energy `E_α` is a scalar that only
/// contributes the phase removed by normalization, so it is left out; the
/// second-order correction from off-diagonal `H_SB` elements is not included.
pub fn project_hamiltonian(asm: &ClusterAssembly, levels: &QubitLevels) -> Result<ProjectedPair, CceError> {
    levels.check_orthonormal(1e-10)?;
    let Some((ops, _)) = &asm.central else {
        return Err(CceError::InvalidLevels("projection needs the central spin in the assembly".into()));
    };
    if ops.dim() != levels.dim() {
        return Err(CceError::InvalidLevels(format!(
            "levels live in dimension {}, central spin has {}",
            levels.dim(),
            ops.dim()
        )));
    }
    let s = levels.spin_expectations(ops);
    let build = |alpha: usize| {
        let mut h = asm.hb.clone();
        for (a, v) in asm.coupling.iter().enumerate() {
            let c = s[alpha][a];
            if c != 0.0 {
                h += v * C64::new(c, 0.0);
            }
        }
        // remove round-off asymmetry
        (&h + h.adjoint()) * C64::new(0.5, 0.0)
    };
    let pair = ProjectedPair { h0: build(0), h1: build(1) };
    debug_assert!(hermiticity_defect(&pair.h0) < 1e-12);
    Ok(pair)
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::bath::{compute_couplings, BathSpin, CouplingMode};
    use crate::cce::select_levels;
    use crate::spinops::{
        assemble_cluster_hamiltonian, build_spin_operators, CentralSpin, IsotopeTable, LevelSelector, Spin, Tensor3,
        TensorUnit,
    };

    fn nucleus(p: [f64; 3], a: Tensor3) -> BathSpin {
        let mut s = BathSpin::new(IsotopeTable::builtin().get("13C").unwrap().clone(), p);
        s.a = Some(a);
        s
    }

    #[test]
    fn spin_half_secular() {
        let azz = 1.3;
        let bath = vec![nucleus([0.0, 0.0, 3.0], Tensor3::diag(0.0, 0.0, azz, TensorUnit::AngularFrequency))];
        let c = CentralSpin::electron(Spin::HALF, 2.0, 0.0, 0.0, LevelSelector::Sz(0.5, -0.5)).unwrap();
        let cp = compute_couplings(&c, &bath, CouplingMode::PointDipole, &BTreeMap::new()).unwrap();
        let asm = assemble_cluster_hamiltonian(Some(&c), &bath, &cp, &[0], [0.0, 0.0, 0.0]).unwrap();
        let lv = select_levels(c.levels, c.s, &asm.central.as_ref().unwrap().1).unwrap();
        let p = project_hamiltonian(&asm, &lv).unwrap();
        let iz = build_spin_operators(Spin::HALF).z;
        assert!((&p.h0 - &iz * C64::new(azz / 2.0, 0.0)).norm() < 1e-14);
        assert!((&p.h1 + &iz * C64::new(azz / 2.0, 0.0)).norm() < 1e-14);
        assert!(p.commutes(1e-14));
    }

    #[test]
    fn nv_convention_levels() {
        let a = Tensor3::from_components(&[0.3, 0.1, 0.2, 0.1, 0.4, -0.2, 0.5, -0.6, 1.1], TensorUnit::AngularFrequency)
            .unwrap();
        let bath = vec![
            nucleus([0.0, 0.0, 3.0], a),
            nucleus([2.0, 1.0, -3.0], a * 0.5),
        ];
        let c = CentralSpin::electron(Spin::ONE, 2.0028, 1000.0, 0.0, LevelSelector::Sz(0.0, -1.0)).unwrap();
        let cp = compute_couplings(&c, &bath, CouplingMode::PointDipole, &BTreeMap::new()).unwrap();
        let b = [0.0, 0.0, 100.0];
        let asm = assemble_cluster_hamiltonian(Some(&c), &bath, &cp, &[0, 1], b).unwrap();
        let lv = select_levels(c.levels, c.s, &asm.central.as_ref().unwrap().1).unwrap();
        let p = project_hamiltonian(&asm, &lv).unwrap();
        assert!((&p.h0 - &asm.hb).norm() < 1e-12);
        // H(1) = H_B - Σ_b A_zb I_b
        let mut expected = asm.hb.clone();
        for (k, t) in [a, a * 0.5].iter().enumerate() {
            for bcomp in 0..3 {
                expected -= &asm.bath_ops[k][bcomp] * C64::new(t.m[2][bcomp], 0.0);
            }
        }
        assert!((&p.h1 - expected).norm() < 1e-12);
        assert!(hermiticity_defect(&p.h0) < 1e-12 && hermiticity_defect(&p.h1) < 1e-12);
    }

    #[test]
    fn rejects_non_orthonormal_levels() {
        let bath = vec![nucleus([0.0, 0.0, 3.0], Tensor3::zeros(TensorUnit::AngularFrequency))];
        let c = CentralSpin::electron(Spin::HALF, 2.0, 0.0, 0.0, LevelSelector::Sz(0.5, -0.5)).unwrap();
        let cp = compute_couplings(&c, &bath, CouplingMode::PointDipole, &BTreeMap::new()).unwrap();
        let asm = assemble_cluster_hamiltonian(Some(&c), &bath, &cp, &[0], [0.0; 3]).unwrap();
        let mut lv = select_levels(c.levels, c.s, &asm.central.as_ref().unwrap().1).unwrap();
        lv.states[1] = lv.states[0].clone();
        assert!(matches!(project_hamiltonian(&asm, &lv), Err(CceError::NonOrthonormalLevels(_))));
    }
}
