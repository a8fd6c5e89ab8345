use std::collections::HashMap;

use rayon::prelude::*;

use crate::bath::{proper_subsets, BathSpin, Cluster, ClusterSet, Couplings};
use crate::linalg::{HermitianEigen, C64};
use crate::spinops::{assemble_cluster_hamiltonian, SpinError};

use super::{check_times, BathState, CceError};

/// `Re Tr[ρ X(t) X]` with `X = Σ_i A_zz,i I_z,i` in the Heisenberg picture of
/// `H_B` restricted to `members`.
fn cluster_correlation(
    bath: &[BathSpin],
    couplings: &Couplings,
    state: &BathState,
    members: &[usize],
    b: [f64; 3],
    times: &[f64],
) -> Result<Vec<f64>, CceError> {
    let asm = assemble_cluster_hamiltonian(None, bath, couplings, members, b)?;
    let d = asm.bath_dim();
    let mut x = crate::linalg::CMatrix::zeros(d, d);
    for (k, &i) in asm.members.iter().enumerate() {
        let azz = couplings.a(i).ok_or(SpinError::MissingHyperfine(i))?.to_angular().m[2][2];
        x += &asm.bath_ops[k][2] * C64::new(azz, 0.0);
    }
    let rho = state.cluster_rho(&asm.members, bath);
    let eig = HermitianEigen::new(&asm.hb);
    let v = &eig.vectors;
    let xe = v.adjoint() * &x * v;
    let y = &xe * (v.adjoint() * rho * v);
    Ok(times
        .iter()
        .map(|&t| {
            let mut s = C64::new(0.0, 0.0);
            for m in 0..d {
                for n in 0..d {
                    let ph = C64::from_polar(1.0, (eig.values[m] - eig.values[n]) * t);
                    s += xe[(m, n)] * y[(n, m)] * ph;
                }
            }
            s.re
        })
        .collect())
}

/// Overhauser-field autocorrelation `C(t) = ⟨X(t) X⟩` expanded over clusters:
/// `C = Σ_C C̃_C` with `C̃_C = C_C − Σ_{C' ⊂ C} C̃_{C'}`. Sub-clusters absent
/// from `clusters` contribute nothing.
pub fn autocorrelation_cce(
    bath: &[BathSpin],
    couplings: &Couplings,
    clusters: &ClusterSet,
    state: &BathState,
    b: [f64; 3],
    times: &[f64],
) -> Result<Vec<f64>, CceError> {
    check_times(times)?;
    let mut irreducible: HashMap<Cluster, Vec<f64>> = HashMap::new();
    let mut total = vec![0.0; times.len()];
    for level in clusters.levels() {
        let raw: Vec<Vec<f64>> = level
            .par_iter()
            .map(|c| cluster_correlation(bath, couplings, state, c, b, times))
            .collect::<Result<_, _>>()?;
        let reduced: Vec<Vec<f64>> = level
            .par_iter()
            .zip(raw)
            .map(|(c, mut r)| {
                for sub in proper_subsets(c) {
                    if let Some(s) = irreducible.get(&sub) {
                        r.iter_mut().zip(s).for_each(|(a, b)| *a -= b);
                    }
                }
                r
            })
            .collect();
        for (c, r) in level.iter().zip(reduced) {
            total.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
            irreducible.insert(c.clone(), r);
        }
    }
    Ok(total)
}
