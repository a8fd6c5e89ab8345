use crate::linalg::{CMatrix, C64};

use super::Spin;

/// Matrices of `Sx`, `Sy`, `Sz` in the descending-m basis.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub s: Spin,
    pub x: CMatrix,
    pub y: CMatrix,
    pub z: CMatrix,
}

impl SpinOperators {
    pub fn dim(&self) -> usize {
        self.s.dim()
    }

    pub fn component(&self, a: usize) -> &CMatrix {
        match a {
            0 => &self.x,
            1 => &self.y,
            _ => &self.z,
        }
    }

    pub fn components(&self) -> [&CMatrix; 3] {
        [&self.x, &self.y, &self.z]
    }

    /// Raising operator `S+ = Sx + i Sy`.
    pub fn raising(&self) -> CMatrix {
        &self.x + &self.y * C64::new(0.0, 1.0)
    }

    pub fn lowering(&self) -> CMatrix {
        &self.x - &self.y * C64::new(0.0, 1.0)
    }
}

/// Builds the spin matrices from the ladder-operator matrix elements
/// `⟨m+1|S+|m⟩ = sqrt(s(s+1) - m(m+1))`.
pub fn build_spin_operators(s: Spin) -> SpinOperators {
    let d = s.dim();
    let sv = s.value();
    let mut plus = CMatrix::zeros(d, d);
    let mut z = CMatrix::zeros(d, d);
    for k in 0..d {
        let m = s.m_of_index(k);
        z[(k, k)] = C64::new(m, 0.0);
        if k > 0 {
            // |m⟩ at index k is raised to |m+1⟩ at index k-1
            plus[(k - 1, k)] = C64::new((sv * (sv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let minus = plus.adjoint();
    let x = (&plus + &minus) * C64::new(0.5, 0.0);
    let y = (&plus - &minus) * C64::new(0.0, -0.5);
    SpinOperators { s, x, y, z }
}
