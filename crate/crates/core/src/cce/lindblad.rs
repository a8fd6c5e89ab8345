use crate::bath::JumpOp;
use crate::linalg::{expm_pade, identity, kron, trace, unvectorize, vectorize, CMatrix, C64, I};

use super::coherence::validate_density;
use super::{check_times, CceError, ProjectedPair, PulseSequence};

/// Jump operator of one member spin from its embedded `[Ix, Iy, Iz]`.
pub fn jump_operator(ops: &[CMatrix; 3], jump: JumpOp) -> CMatrix {
    match jump {
        JumpOp::X => ops[0].clone(),
        JumpOp::Y => ops[1].clone(),
        JumpOp::Z => ops[2].clone(),
        JumpOp::Plus => &ops[0] + &ops[1] * I,
        JumpOp::Minus => &ops[0] - &ops[1] * I,
    }
}

/// Column-stacked generator of
/// `dX/dt = -i(H_a X - X H_b) + Σ γ (L X L† - ½{L†L, X})`.
fn generator(ha: &CMatrix, hb: &CMatrix, jumps: &[(CMatrix, f64)]) -> CMatrix {
    let d = ha.nrows();
    let id = identity(d);
    let mut g = (kron(&id, ha) - kron(&hb.transpose(), &id)) * (-I);
    for (l, rate) in jumps {
        if *rate == 0.0 {
            continue;
        }
        let ldl = l.adjoint() * l;
        let r = C64::new(*rate, 0.0);
        g += (kron(&l.conjugate(), l) - (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * C64::new(0.5, 0.0)) * r;
    }
    g
}

/// Dissipative cluster coherence: the inter-branch operator `X` starts at
/// `ρ_C`, evolves with `H(0)` on the left and `H(1)` on the right (swapped at
/// every π-pulse) plus the Lindblad dissipator, and `L_C = Tr X`.
pub fn lindblad_cluster(
    pair: &ProjectedPair,
    rho: &CMatrix,
    jumps: &[(CMatrix, f64)],
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<Vec<C64>, CceError> {
    check_times(times)?;
    validate_density(rho)?;
    if let Some((_, r)) = jumps.iter().find(|(_, r)| *r < 0.0 || !r.is_finite()) {
        return Err(CceError::NegativeRate(*r));
    }
    let d = pair.dim();
    let gens = [generator(&pair.h0, &pair.h1, jumps), generator(&pair.h1, &pair.h0, jumps)];
    let x0 = vectorize(rho);
    Ok(times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return C64::new(1.0, 0.0);
            }
            let mut x = x0.clone();
            for (k, tau) in pulses.segments(t).into_iter().enumerate() {
                if tau != 0.0 {
                    x = expm_pade(&(&gens[k % 2] * C64::new(tau, 0.0))) * x;
                }
            }
            trace(&unvectorize(&x, d, d))
        })
        .collect())
}
