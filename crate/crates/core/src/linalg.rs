//! Dense complex linear algebra shared by the expansion engines.
//!
//! Engine propagators go through [`HermitianEigen`] (unitary segments) and
//! [`expm_pade`] (non-Hermitian Lindblad generators). The oracle module keeps
//! its own exponential so the two paths stay independent.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = x * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Embeds single-site operators into a tensor-product space. Sites not listed
/// receive the identity. `ops` must have distinct site indices.
pub fn embed(ops: &[(usize, &CMatrix)], dims: &[usize]) -> CMatrix {
    let mut out = CMatrix::from_element(1, 1, ONE);
    for (site, &d) in dims.iter().enumerate() {
        let factor = match ops.iter().find(|(s, _)| *s == site) {
            Some((_, op)) => (*op).clone(),
            None => identity(d),
        };
        out = kron(&out, &factor);
    }
    out
}

/// `a · b` through a packed, SIMD-blocked complex kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, k) = a.shape();
    assert_eq!(k, b.nrows(), "matmul: inner dimensions differ");
    let n = b.ncols();
    let mut out = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    // SAFETY: Complex<f64> is repr(C) { re, im }, the layout of [f64; 2];
    // all three buffers are column-major with the strides given.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr().cast(),
            1,
            m as isize,
            b.as_ptr().cast(),
            1,
            k as isize,
            [0.0, 0.0],
            out.as_mut_ptr().cast(),
            1,
            m as isize,
        );
    }
    out
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Frobenius norm of `m - m†` relative to the norm of `m` (absolute when `m`
/// vanishes).
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let diff = (m - m.adjoint()).norm();
    let scale = m.norm();
    if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// Eigendecomposition `H = V diag(λ) V†` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(h: &CMatrix) -> Self {
        // symmetrize so round-off asymmetry never leaks into the solver
        let sym = (h + h.adjoint()) * C64::new(0.5, 0.0);
        let eig = SymmetricEigen::new(sym);
        Self {
            values: eig.eigenvalues.iter().copied().collect(),
            vectors: eig.eigenvectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i H tau)`.
    pub fn propagator(&self, tau: f64) -> CMatrix {
        let d = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let phase = C64::from_polar(1.0, -lam * tau);
            for i in 0..d {
                scaled[(i, j)] *= phase;
            }
        }
        scaled * self.vectors.adjoint()
    }

    /// Eigenvalues with their column indices, ascending.
    pub fn sorted(&self) -> Vec<(usize, f64)> {
        let mut idx: Vec<(usize, f64)> = self.values.iter().copied().enumerate().collect();
        idx.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        idx
    }
}

fn one_norm(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant (Higham 2005 coefficients). Works for general complex matrices.
pub fn expm_pade(a: &CMatrix) -> CMatrix {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(s), 0.0);
    let a = a * scale;
    let c = |x: f64| C64::new(x, 0.0);
    let id = identity(n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * c(B[13]) + &a4 * c(B[11]) + &a2 * c(B[9]))
        + &a6 * c(B[7])
        + &a4 * c(B[5])
        + &a2 * c(B[3])
        + &id * c(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * c(B[12]) + &a4 * c(B[10]) + &a2 * c(B[8]))
        + &a6 * c(B[6])
        + &a4 * c(B[4])
        + &a2 * c(B[2])
        + &id * c(B[0]);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Column-stacking vectorization: `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
pub fn vectorize(m: &CMatrix) -> nalgebra::DVector<C64> {
    nalgebra::DVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &nalgebra::DVector<C64>, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_iterator(rows, cols, v.iter().copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_matches_naive_product() {
        for (m, k, n) in [(1, 1, 1), (3, 5, 2), (17, 9, 33), (64, 64, 64)] {
            let a = CMatrix::from_fn(m, k, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
            let b = CMatrix::from_fn(k, n, |i, j| C64::new((i + 2 * j) as f64 * 0.3 - 1.0, (i * j) as f64 * 0.05));
            assert!((matmul(&a, &b) - &a * &b).norm() < 1e-10 * (1.0 + (&a * &b).norm()));
        }
        assert_eq!(matmul(&CMatrix::zeros(2, 0), &CMatrix::zeros(0, 3)), CMatrix::zeros(2, 3));
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    #[test]
    fn kron_dimensions_and_entries() {
        let x = pauli_x();
        let id = identity(3);
        let k = kron(&x, &id);
        assert_eq!(k.shape(), (6, 6));
        assert_eq!(k[(0, 3)], ONE);
        assert_eq!(k[(0, 0)], ZERO);
    }

    #[test]
    fn embed_matches_explicit_kron() {
        let x = pauli_x();
        let e = embed(&[(1, &x)], &[2, 2, 3]);
        let explicit = kron(&kron(&identity(2), &x), &identity(3));
        assert!((e - explicit).norm() < 1e-15);
    }

    #[test]
    fn eigen_propagator_rotates_pauli() {
        let h = pauli_x();
        let u = HermitianEigen::new(&h).propagator(0.3);
        assert!((u[(0, 0)] - C64::new(0.3f64.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - C64::new(0.0, -0.3f64.sin())).norm() < 1e-14);
    }

    #[test]
    fn pade_matches_eigen_for_hermitian_generator() {
        let h = CMatrix::from_row_slice(
            3,
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.2, 0.5),
                C64::new(0.0, 0.0),
                C64::new(0.2, -0.5),
                C64::new(-0.7, 0.0),
                C64::new(3.0, 1.0),
                C64::new(0.0, 0.0),
                C64::new(3.0, -1.0),
                C64::new(2.0, 0.0),
            ],
        );
        let tau = 2.7;
        let by_eigen = HermitianEigen::new(&h).propagator(tau);
        let by_pade = expm_pade(&(&h * C64::new(0.0, -tau)));
        assert!((by_eigen - by_pade).norm() < 1e-12);
    }

    #[test]
    fn vectorization_identity() {
        let a = CMatrix::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = CMatrix::from_fn(3, 3, |i, j| C64::new((i * j) as f64, 1.0));
        let x = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64 - j as f64, 0.5));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-12);
    }
}
