use crate::bath::{BathSpin, Couplings};
use crate::linalg::{embed, hermiticity_defect, kron, CMatrix, C64};

use super::constants::PhysicalConstants;
use super::{
    build_spin_operators, quadrupole_term, zeeman_term, zfs_term, Spin, SpinError, SpinOperators, Tensor3,
    TensorUnit, ZeemanCoupling, Zfs,
};

/// Which two central-spin states form the qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelSelector {
    /// Bare `Sz` eigenstates with the given projections.
    Sz(f64, f64),
    /// Eigenstates of the central Hamiltonian, labelled by the `Sz` states
    /// they continue to when the field is made large.
    Eigen(f64, f64),
}

impl LevelSelector {
    pub fn labels(&self) -> (f64, f64) {
        match *self {
            LevelSelector::Sz(a, b) | LevelSelector::Eigen(a, b) => (a, b),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CentralSpin {
    pub s: Spin,
    pub zeeman: ZeemanCoupling,
    pub zfs: Zfs,
    /// Å, normally the origin.
    pub position: [f64; 3],
    pub levels: LevelSelector,
}

impl CentralSpin {
    pub fn new(s: Spin, zeeman: ZeemanCoupling, zfs: Zfs, levels: LevelSelector) -> Result<Self, SpinError> {
        let (a, b) = levels.labels();
        if s.index_of_m(a).is_none() || s.index_of_m(b).is_none() {
            return Err(SpinError::InvalidCentral(format!(
                "levels ({a}, {b}) are not projections of spin {s}"
            )));
        }
        if a == b {
            return Err(SpinError::InvalidCentral("qubit levels must be distinct".into()));
        }
        Ok(Self {
            s,
            zeeman,
            zfs,
            position: [0.0; 3],
            levels,
        })
    }

    /// Electron spin with isotropic g, axial ZFS (rad/ms).
    pub fn electron(s: Spin, g: f64, d: f64, e: f64, levels: LevelSelector) -> Result<Self, SpinError> {
        Self::new(
            s,
            ZeemanCoupling::GTensor(Tensor3::isotropic(g, TensorUnit::Dimensionless)),
            Zfs::Axial { d, e },
            levels,
        )
    }

    /// Effective gyromagnetic ratio (rad/ms/G) used for point-dipole
    /// couplings to the bath.
    pub fn gamma(&self) -> f64 {
        match &self.zeeman {
            ZeemanCoupling::GTensor(g) => g.trace() / 3.0 * PhysicalConstants::builtin().bohr_rate(),
            ZeemanCoupling::Gamma(g) => *g,
        }
    }

    pub fn hamiltonian(&self, b: [f64; 3]) -> Result<CMatrix, SpinError> {
        let ops = build_spin_operators(self.s);
        Ok(zeeman_term(&self.zeeman, b, &ops)? + zfs_term(&self.zfs, &ops))
    }
}

/// Hermitian matrix over a tensor-product basis.
#[derive(Debug, Clone)]
pub struct ClusterHamiltonian {
    pub matrix: CMatrix,
    /// Site dimensions, central spin first when present.
    pub dims: Vec<usize>,
}

impl ClusterHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }
}

/// Pieces of a cluster Hamiltonian kept separate so that both projected and
/// joint-space engines can be built from one assembly.
#[derive(Debug, Clone)]
pub struct ClusterAssembly {
    /// Global indices of the member bath spins, ascending.
    pub members: Vec<usize>,
    pub bath_dims: Vec<usize>,
    /// Central spin operators and `H_S`, if the central spin is present.
    pub central: Option<(SpinOperators, CMatrix)>,
    /// Bath Hamiltonian on the bath space.
    pub hb: CMatrix,
    /// `V_a = Σ_k A_k[a][b] I_k,b` so that `H_SB = Σ_a S_a ⊗ V_a`.
    pub coupling: [CMatrix; 3],
    /// Embedded spin operators of each member on the bath space.
    pub bath_ops: Vec<[CMatrix; 3]>,
}

impl ClusterAssembly {
    pub fn bath_dim(&self) -> usize {
        self.bath_dims.iter().product()
    }

    pub fn central_dim(&self) -> usize {
        self.central.as_ref().map_or(1, |(o, _)| o.dim())
    }

    /// Adds `Σ_a f_a I_k,a` to the bath Hamiltonian (mean field on member `k`).
    pub fn add_bath_field(&mut self, k: usize, field: [f64; 3]) {
        for (a, &f) in field.iter().enumerate() {
            if f != 0.0 {
                self.hb += &self.bath_ops[k][a] * C64::new(f, 0.0);
            }
        }
    }

    /// Adds `Σ_a f_a S_a` to the central Hamiltonian.
    pub fn add_central_field(&mut self, field: [f64; 3]) {
        if let Some((ops, hs)) = self.central.as_mut() {
            for (a, &f) in field.iter().enumerate() {
                if f != 0.0 {
                    *hs += ops.component(a) * C64::new(f, 0.0);
                }
            }
        }
    }

    /// `H_S ⊗ I + I ⊗ H_B + Σ_a S_a ⊗ V_a` on the joint space.
    pub fn full(&self) -> ClusterHamiltonian {
        let db = self.bath_dim();
        match &self.central {
            None => ClusterHamiltonian {
                matrix: self.hb.clone(),
                dims: self.bath_dims.clone(),
            },
            Some((ops, hs)) => {
                let ds = ops.dim();
                let mut h = kron(hs, &CMatrix::identity(db, db)) + kron(&CMatrix::identity(ds, ds), &self.hb);
                for a in 0..3 {
                    h += kron(ops.component(a), &self.coupling[a]);
                }
                let mut dims = vec![ds];
                dims.extend_from_slice(&self.bath_dims);
                ClusterHamiltonian { matrix: h, dims }
            }
        }
    }
}

/// Builds `H = H_S + H_SB + H_B` for the bath spins `members` (global
/// indices into `bath`), optionally including the central spin.
pub fn assemble_cluster_hamiltonian(
    central: Option<&CentralSpin>,
    bath: &[BathSpin],
    couplings: &Couplings,
    members: &[usize],
    b: [f64; 3],
) -> Result<ClusterAssembly, SpinError> {
    let mut members = members.to_vec();
    members.sort_unstable();
    members.dedup();
    let local: Vec<SpinOperators> = members.iter().map(|&i| build_spin_operators(bath[i].species.s)).collect();
    let bath_dims: Vec<usize> = local.iter().map(|o| o.dim()).collect();
    let db: usize = bath_dims.iter().product();

    let bath_ops: Vec<[CMatrix; 3]> = local
        .iter()
        .enumerate()
        .map(|(k, o)| {
            [
                embed(&[(k, &o.x)], &bath_dims),
                embed(&[(k, &o.y)], &bath_dims),
                embed(&[(k, &o.z)], &bath_dims),
            ]
        })
        .collect();

    let mut hb = CMatrix::zeros(db, db);
    for (k, &i) in members.iter().enumerate() {
        let spin = &bath[i];
        let zee = zeeman_term(&ZeemanCoupling::Gamma(spin.species.gamma), b, &local[k])?;
        let mut single = zee;
        if let Some(q) = &spin.q {
            single += quadrupole_term(q, &local[k]);
        }
        hb += embed(&[(k, &single)], &bath_dims);
    }
    for (k, &i) in members.iter().enumerate() {
        for (l, &j) in members.iter().enumerate().skip(k + 1) {
            if let Some(t) = couplings.j(bath, i, j)? {
                let t = t.to_angular();
                for a in 0..3 {
                    for c in 0..3 {
                        let v = t.m[a][c];
                        if v != 0.0 {
                            hb += &bath_ops[k][a] * &bath_ops[l][c] * C64::new(v, 0.0);
                        }
                    }
                }
            }
        }
    }

    let mut coupling = [CMatrix::zeros(db, db), CMatrix::zeros(db, db), CMatrix::zeros(db, db)];
    let central_part = match central {
        None => None,
        Some(c) => {
            let ops = build_spin_operators(c.s);
            let hs = c.hamiltonian(b)?;
            for (k, &i) in members.iter().enumerate() {
                let a_t = couplings.a(i).ok_or(SpinError::MissingHyperfine(i))?.to_angular();
                for (a, v) in coupling.iter_mut().enumerate() {
                    for c2 in 0..3 {
                        let x = a_t.m[a][c2];
                        if x != 0.0 {
                            *v += &bath_ops[k][c2] * C64::new(x, 0.0);
                        }
                    }
                }
            }
            Some((ops, hs))
        }
    };

    Ok(ClusterAssembly {
        members,
        bath_dims,
        central: central_part,
        hb,
        coupling,
        bath_ops,
    })
}
