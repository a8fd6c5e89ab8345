use nalgebra::DVector;

use crate::linalg::{hermiticity_defect, kron, matmul, trace, CMatrix, HermitianEigen, C64};

use super::{check_times, CceError, ProjectedPair, PulseSequence, QubitLevels};

/// Checks that `rho` is Hermitian, has unit trace and no eigenvalue below
/// `-1e-10`.
pub fn validate_density(rho: &CMatrix) -> Result<(), CceError> {
    if !rho.is_square() {
        return Err(CceError::NonPhysicalState("density matrix must be square".into()));
    }
    if hermiticity_defect(rho) > 1e-10 {
        return Err(CceError::NonPhysicalState("density matrix is not Hermitian".into()));
    }
    let tr = trace(rho);
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(CceError::NonPhysicalState(format!("trace {tr} != 1")));
    }
    let is_diag = rho.iter().enumerate().all(|(k, x)| {
        let (i, j) = (k % rho.nrows(), k / rho.nrows());
        i == j || *x == C64::new(0.0, 0.0)
    });
    let min = if is_diag {
        rho.diagonal().iter().map(|x| x.re).fold(f64::INFINITY, f64::min)
    } else {
        HermitianEigen::new(rho).values.into_iter().fold(f64::INFINITY, f64::min)
    };
    if min < -1e-10 {
        return Err(CceError::NonPhysicalState(format!("negative eigenvalue {min}")));
    }
    Ok(())
}

/// `V e^{-iλτ} V† x`.
pub(crate) fn apply_propagator(eig: &HermitianEigen, tau: f64, x: &CMatrix) -> CMatrix {
    let mut y = matmul(&eig.vectors.adjoint(), x);
    for (r, &l) in eig.values.iter().enumerate() {
        let ph = C64::from_polar(1.0, -l * tau);
        for v in y.row_mut(r).iter_mut() {
            *v *= ph;
        }
    }
    matmul(&eig.vectors, &y)
}

/// `Tr[A B†]` without forming the product.
pub(crate) fn trace_ab_dagger(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y.conj()).sum()
}

/// `L_C(t) = Tr[U⁽⁰⁾(t) ρ U⁽¹⁾†(t)]`. Branch 0 starts under `H(0)`, branch 1
/// under `H(1)`, and both swap Hamiltonians at every π-pulse.
pub fn cluster_coherence(
    pair: &ProjectedPair,
    rho: &CMatrix,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<Vec<C64>, CceError> {
    check_times(times)?;
    validate_density(rho)?;
    if rho.nrows() != pair.dim() {
        return Err(CceError::NonPhysicalState(format!(
            "density dimension {} does not match cluster dimension {}",
            rho.nrows(),
            pair.dim()
        )));
    }
    let eig = [HermitianEigen::new(&pair.h0), HermitianEigen::new(&pair.h1)];
    Ok(projected_series(&eig, rho, pulses, times))
}

pub(crate) fn projected_series(eig: &[HermitianEigen; 2], rho: &CMatrix, pulses: &PulseSequence, times: &[f64]) -> Vec<C64> {
    let d = rho.nrows();
    times
        .iter()
        .map(|&t| {
            if t == 0.0 {
                return C64::new(1.0, 0.0);
            }
            let mut u = [CMatrix::identity(d, d), CMatrix::identity(d, d)];
            for (k, tau) in pulses.segments(t).into_iter().enumerate() {
                for (branch, ub) in u.iter_mut().enumerate() {
                    *ub = apply_propagator(&eig[(branch + k) % 2], tau, ub);
                }
            }
            trace_ab_dagger(&matmul(&u[0], rho), &u[1])
        })
        .collect()
}

/// Unnormalized generalized coherence `Tr[W_a ρ_B W_b†]` with
/// `W_α = (⟨α| ⊗ 1) U(t) (|ψ⟩ ⊗ 1)`, `|ψ⟩ = (|0⟩ + |1⟩)/√2`, and `(a, b)`
/// equal to `(0, 1)` after an even and `(1, 0)` after an odd number of pulses.
/// `h` acts on central ⊗ bath with the central spin first.
pub fn joint_coherence(
    h: &CMatrix,
    bath_dim: usize,
    levels: &QubitLevels,
    rho_bath: &CMatrix,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<Vec<C64>, CceError> {
    check_times(times)?;
    validate_density(rho_bath)?;
    let ds = levels.dim();
    if h.nrows() != ds * bath_dim || rho_bath.nrows() != bath_dim {
        return Err(CceError::NonPhysicalState("joint Hamiltonian and bath state dimensions disagree".into()));
    }
    let eig = HermitianEigen::new(h);
    let pulse = kron(&levels.pi_pulse(), &CMatrix::identity(bath_dim, bath_dim));
    let psi: DVector<C64> = (&levels.states[0] + &levels.states[1]) * C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let x0 = kron(&CMatrix::from_column_slice(ds, 1, psi.as_slice()), &CMatrix::identity(bath_dim, bath_dim));
    let (a, b) = if pulses.count() % 2 == 0 { (0, 1) } else { (1, 0) };
    let project = |x: &CMatrix, v: &DVector<C64>| {
        let mut w = CMatrix::zeros(bath_dim, bath_dim);
        for i in 0..ds {
            let c = v[i].conj();
            if c != C64::new(0.0, 0.0) {
                w += x.rows(i * bath_dim, bath_dim) * c;
            }
        }
        w
    };
    Ok(times
        .iter()
        .map(|&t| {
            let mut x = x0.clone();
            let segs = pulses.segments(t);
            let last = segs.len() - 1;
            for (k, tau) in segs.into_iter().enumerate() {
                if tau != 0.0 {
                    x = apply_propagator(&eig, tau, &x);
                }
                if k < last {
                    x = matmul(&pulse, &x);
                }
            }
            let wa = project(&x, &levels.states[a]);
            let wb = project(&x, &levels.states[b]);
            trace_ab_dagger(&matmul(&wa, rho_bath), &wb)
        })
        .collect())
}
