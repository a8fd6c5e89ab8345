use std::collections::BTreeMap;

use crate::spinops::{dipolar_tensor, CentralSpin, SpinError, Tensor3, DEFAULT_R_MIN};

use super::{neighbor_pairs, sub, BathError, BathSpin};

/// How intra-bath couplings are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingMode {
    /// Point-dipole for every pair, file values override.
    PointDipole,
    /// Only file-supplied pair tensors; a missing pair is an error.
    FileOnly,
    /// No intra-bath coupling.
    Uncoupled,
}

/// Central-spin couplings per bath spin and pair couplings between bath spins.
/// Pair tensors that were not supplied are evaluated on demand.
#[derive(Debug, Clone)]
pub struct Couplings {
    pub mode: CouplingMode,
    a: Vec<Tensor3>,
    /// Keyed by `(i, j)` with `i < j`; the tensor couples `I_i·J·I_j`.
    overrides: BTreeMap<(usize, usize), Tensor3>,
    r_min: f64,
}

impl Couplings {
    pub fn a(&self, i: usize) -> Option<&Tensor3> {
        self.a.get(i)
    }

    pub fn all_a(&self) -> &[Tensor3] {
        &self.a
    }

    pub fn set_a(&mut self, i: usize, t: Tensor3) {
        self.a[i] = t;
    }

    pub fn set_j(&mut self, i: usize, j: usize, t: Tensor3) {
        if i < j {
            self.overrides.insert((i, j), t);
        } else {
            self.overrides.insert((j, i), t.transpose());
        }
    }

    /// Couplings restricted to the bath spins `keep` (ascending), renumbered
    /// `0..keep.len()`.
    pub fn subset(&self, keep: &[usize]) -> Couplings {
        let pos: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(new, &old)| (old, new)).collect();
        let overrides = self
            .overrides
            .iter()
            .filter_map(|(&(i, j), t)| Some(((*pos.get(&i)?, *pos.get(&j)?), *t)))
            .collect();
        Couplings {
            mode: self.mode,
            a: keep.iter().map(|&i| self.a[i]).collect(),
            overrides,
            r_min: self.r_min,
        }
    }

    /// Coupling tensor between bath spins `i` and `j`, oriented so that the
    /// term is `I_i·J·I_j`. `J(j, i) = J(i, j)ᵀ`.
    pub fn j(&self, bath: &[BathSpin], i: usize, j: usize) -> Result<Option<Tensor3>, SpinError> {
        if i == j {
            return Ok(None);
        }
        let (lo, hi, flip) = if i < j { (i, j, false) } else { (j, i, true) };
        let t = match self.overrides.get(&(lo, hi)) {
            Some(t) => Some(*t),
            None => match self.mode {
                CouplingMode::Uncoupled => None,
                CouplingMode::FileOnly => return Err(SpinError::MissingCoupling(lo, hi)),
                CouplingMode::PointDipole => Some(dipolar_tensor(
                    sub(bath[hi].position, bath[lo].position),
                    bath[lo].species.gamma,
                    bath[hi].species.gamma,
                    self.r_min,
                )?),
            },
        };
        Ok(t.map(|t| if flip { t.transpose() } else { t }))
    }
}

/// Fills central couplings (file values kept bit-exactly, point-dipole
/// otherwise) and checks that no two spins coincide.
pub fn compute_couplings(
    central: &CentralSpin,
    bath: &[BathSpin],
    mode: CouplingMode,
    pair_overrides: &BTreeMap<(usize, usize), Tensor3>,
) -> Result<Couplings, BathError> {
    compute_couplings_with(central, bath, mode, pair_overrides, DEFAULT_R_MIN)
}

pub fn compute_couplings_with(
    central: &CentralSpin,
    bath: &[BathSpin],
    mode: CouplingMode,
    pair_overrides: &BTreeMap<(usize, usize), Tensor3>,
    r_min: f64,
) -> Result<Couplings, BathError> {
    let gc = central.gamma();
    let mut a = Vec::with_capacity(bath.len());
    for spin in bath {
        let t = match spin.a {
            Some(t) => t,
            None => dipolar_tensor(sub(spin.position, central.position), gc, spin.species.gamma, r_min)?,
        };
        a.push(t);
    }
    let positions: Vec<[f64; 3]> = bath.iter().map(|s| s.position).collect();
    if let Some(&(i, j)) = neighbor_pairs(&positions, r_min).first() {
        if super::norm(sub(positions[i], positions[j])) < r_min {
            return Err(SpinError::CoincidentSpins {
                a: positions[i],
                b: positions[j],
                r_min,
            }
            .into());
        }
    }
    let mut c = Couplings {
        mode,
        a,
        overrides: BTreeMap::new(),
        r_min,
    };
    for (&(i, j), t) in pair_overrides {
        c.set_j(i, j, *t);
    }
    Ok(c)
}
