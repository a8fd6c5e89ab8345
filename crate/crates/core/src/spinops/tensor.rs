use std::ops::{Add, Mul};

use super::constants::MHZ_TO_RAD_PER_MS;
use super::SpinError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TensorUnit {
    /// rad/ms, the internal unit of every assembled Hamiltonian term.
    AngularFrequency,
    /// Linear MHz, the I/O unit of coupling files.
    Mhz,
    Dimensionless,
}

/// Real 3×3 interaction tensor, rows/columns in (x, y, z) order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3 {
    pub m: [[f64; 3]; 3],
    pub unit: TensorUnit,
}

impl Tensor3 {
    pub fn new(m: [[f64; 3]; 3], unit: TensorUnit) -> Result<Self, SpinError> {
        if m.iter().flatten().any(|x| !x.is_finite()) {
            return Err(SpinError::Dimension("tensor entries must be finite".into()));
        }
        Ok(Self { m, unit })
    }

    /// Nine components in (xx, xy, xz, yx, ..., zz) order.
    pub fn from_components(c: &[f64], unit: TensorUnit) -> Result<Self, SpinError> {
        if c.len() != 9 {
            return Err(SpinError::Dimension(format!("tensor needs 9 components, got {}", c.len())));
        }
        let mut m = [[0.0; 3]; 3];
        for (k, &v) in c.iter().enumerate() {
            m[k / 3][k % 3] = v;
        }
        Self::new(m, unit)
    }

    pub fn zeros(unit: TensorUnit) -> Self {
        Self { m: [[0.0; 3]; 3], unit }
    }

    pub fn diag(a: f64, b: f64, c: f64, unit: TensorUnit) -> Self {
        Self {
            m: [[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]],
            unit,
        }
    }

    pub fn isotropic(a: f64, unit: TensorUnit) -> Self {
        Self::diag(a, a, a, unit)
    }

    pub fn components(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for k in 0..9 {
            out[k] = self.m[k / 3][k % 3];
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.m[j][i];
            }
        }
        Self { m, unit: self.unit }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        (0..3).all(|i| (0..3).all(|j| (self.m[i][j] - self.m[j][i]).abs() <= tol * scale))
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    /// Converts MHz tensors to rad/ms; other units pass through unchanged.
    pub fn to_angular(&self) -> Self {
        match self.unit {
            TensorUnit::Mhz => Self {
                m: self.m.map(|r| r.map(|x| x * MHZ_TO_RAD_PER_MS)),
                unit: TensorUnit::AngularFrequency,
            },
            _ => *self,
        }
    }

    pub fn to_mhz(&self) -> Self {
        match self.unit {
            TensorUnit::AngularFrequency => Self {
                m: self.m.map(|r| r.map(|x| x / MHZ_TO_RAD_PER_MS)),
                unit: TensorUnit::Mhz,
            },
            _ => *self,
        }
    }

    /// `v · T` (row vector times tensor).
    pub fn left_mul(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|a| v[a] * self.m[a][c]).sum();
        }
        out
    }

    /// `T · v`.
    pub fn right_mul(&self, v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (a, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|c| self.m[a][c] * v[c]).sum();
        }
        out
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut m = self.m;
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += rhs.m[i][j];
            }
        }
        Tensor3 { m, unit: self.unit }
    }
}

impl Mul<f64> for Tensor3 {
    type Output = Tensor3;
    fn mul(self, k: f64) -> Tensor3 {
        Tensor3 {
            m: self.m.map(|r| r.map(|x| x * k)),
            unit: self.unit,
        }
    }
}
