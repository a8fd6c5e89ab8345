use crate::linalg::{matmul, CMatrix, C64};

fn norm1(a: &CMatrix) -> f64 {
    (0..a.ncols()).map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `e^A` by Taylor series on `A/2^s` with `‖A/2^s‖₁ ≤ 1/2`, then `s`
/// squarings.
pub fn expm_taylor(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let norm = norm1(a);
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a * C64::new(0.5f64.powi(s), 0.0);
    let mut sum = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..40 {
        term = matmul(&term, &b) * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if norm1(&term) < 1e-18 * norm1(&sum) {
            break;
        }
    }
    for _ in 0..s {
        sum = matmul(&sum, &sum);
    }
    sum
}
