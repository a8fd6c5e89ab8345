use log::warn;

use crate::linalg::{CMatrix, C64};

use super::constants::PhysicalConstants;
use super::{SpinError, SpinOperators, Tensor3, TensorUnit};

/// Default minimum separation (Å) below which two spins are coincident.
pub const DEFAULT_R_MIN: f64 = 0.1;

/// Coupling of a spin to the external field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeemanCoupling {
    /// Electron-like: `(μB/ħ) B·g·S`, g dimensionless.
    GTensor(Tensor3),
    /// Nucleus-like: `γ B·I`, γ in rad/ms/G with its sign.
    Gamma(f64),
}

/// Zero-field splitting, values in rad/ms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Zfs {
    Axial { d: f64, e: f64 },
    Tensor(Tensor3),
}

impl Zfs {
    pub fn is_zero(&self) -> bool {
        match self {
            Zfs::Axial { d, e } => *d == 0.0 && *e == 0.0,
            Zfs::Tensor(t) => t.max_abs() == 0.0,
        }
    }
}

/// Σ_ab T_ab A_a B_b for operator triples on the same space.
pub(crate) fn bilinear(t: &Tensor3, a: &SpinOperators, b: &SpinOperators) -> CMatrix {
    let d = a.dim();
    let mut out = CMatrix::zeros(d, d);
    for i in 0..3 {
        for j in 0..3 {
            let c = t.m[i][j];
            if c != 0.0 {
                out += a.component(i) * b.component(j) * C64::new(c, 0.0);
            }
        }
    }
    out
}

fn linear(field: [f64; 3], ops: &SpinOperators) -> CMatrix {
    let d = ops.dim();
    let mut out = CMatrix::zeros(d, d);
    for (a, &f) in field.iter().enumerate() {
        if f != 0.0 {
            out += ops.component(a) * C64::new(f, 0.0);
        }
    }
    out
}

/// Zeeman Hamiltonian in rad/ms for field `b` in Gauss.
pub fn zeeman_term(coupling: &ZeemanCoupling, b: [f64; 3], ops: &SpinOperators) -> Result<CMatrix, SpinError> {
    match coupling {
        ZeemanCoupling::GTensor(g) => {
            if g.unit != TensorUnit::Dimensionless {
                return Err(SpinError::UnitMismatch(format!(
                    "g tensor must be dimensionless, got {:?}",
                    g.unit
                )));
            }
            let rate = PhysicalConstants::builtin().bohr_rate();
            let field = g.left_mul(b).map(|x| x * rate);
            Ok(linear(field, ops))
        }
        ZeemanCoupling::Gamma(gamma) => Ok(linear(b.map(|x| x * gamma), ops)),
    }
}

/// Zero-field splitting term. Spin-1/2 carries no ZFS: a nonzero input is
/// ignored with a warning.
pub fn zfs_term(zfs: &Zfs, ops: &SpinOperators) -> CMatrix {
    let d = ops.dim();
    if ops.s.twice() < 2 {
        if !zfs.is_zero() {
            warn!("zero-field splitting ignored for spin {}", ops.s);
        }
        return CMatrix::zeros(d, d);
    }
    match zfs {
        Zfs::Axial { d: dd, e } => {
            let sv = ops.s.value();
            let sz2 = &ops.z * &ops.z;
            let sx2 = &ops.x * &ops.x;
            let sy2 = &ops.y * &ops.y;
            let id = CMatrix::identity(d, d);
            (sz2 - id * C64::new(sv * (sv + 1.0) / 3.0, 0.0)) * C64::new(*dd, 0.0) + (sx2 - sy2) * C64::new(*e, 0.0)
        }
        Zfs::Tensor(t) => bilinear(&t.to_angular(), ops, ops),
    }
}

/// Quadrupole term `I·Q·I` for an assembled tensor `eQ·V/(2I(2I-1))`.
pub fn quadrupole_term(q: &Tensor3, ops: &SpinOperators) -> CMatrix {
    let d = ops.dim();
    if ops.s.twice() < 2 {
        return CMatrix::zeros(d, d);
    }
    bilinear(&q.to_angular(), ops, ops)
}

/// Point-dipole coupling tensor between two spins separated by `r` (Å).
pub fn dipolar_tensor(r: [f64; 3], gamma1: f64, gamma2: f64, r_min: f64) -> Result<Tensor3, SpinError> {
    let r2: f64 = r.iter().map(|x| x * x).sum();
    let rn = r2.sqrt();
    if rn < r_min {
        return Err(SpinError::CoincidentSpins {
            a: [0.0; 3],
            b: r,
            r_min,
        });
    }
    let pref = PhysicalConstants::builtin().dipolar_prefactor() * gamma1 * gamma2 / (r2 * r2 * rn);
    let mut m = [[0.0; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        for (b, v) in row.iter_mut().enumerate() {
            let delta = if a == b { r2 } else { 0.0 };
            *v = pref * (delta - 3.0 * r[a] * r[b]);
        }
    }
    Ok(Tensor3 {
        m,
        unit: TensorUnit::AngularFrequency,
    })
}

/// `(A∥, A⊥) = (A_zz, sqrt(A_xz² + A_yz²))`.
pub fn hyperfine_components(a: &Tensor3) -> (f64, f64) {
    (a.m[2][2], a.m[0][2].hypot(a.m[1][2]))
}
