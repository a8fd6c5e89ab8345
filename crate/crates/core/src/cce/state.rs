use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::bath::BathSpin;
use crate::linalg::{CMatrix, C64};

use super::CceError;

/// Product initial state of the bath, diagonal in each spin's `Sz` basis.
/// `None` marks a maximally mixed spin.
#[derive(Debug, Clone, PartialEq)]
pub struct BathState {
    populations: Vec<Option<Vec<f64>>>,
}

impl BathState {
    /// High-temperature state: every spin maximally mixed.
    pub fn mixed(n: usize) -> Self {
        Self {
            populations: vec![None; n],
        }
    }

    /// Pure `Sz` product state; `indices[i]` is the basis index (descending m)
    /// of spin `i`.
    pub fn pure(bath: &[BathSpin], indices: &[usize]) -> Result<Self, CceError> {
        if indices.len() != bath.len() {
            return Err(CceError::NonPhysicalState("one basis index per bath spin required".into()));
        }
        let mut populations = Vec::with_capacity(bath.len());
        for (spin, &k) in bath.iter().zip(indices) {
            let d = spin.species.s.dim();
            if k >= d {
                return Err(CceError::NonPhysicalState(format!("index {k} outside spin dimension {d}")));
            }
            let mut p = vec![0.0; d];
            p[k] = 1.0;
            populations.push(Some(p));
        }
        Ok(Self { populations })
    }

    pub fn set_populations(&mut self, i: usize, p: Vec<f64>) -> Result<(), CceError> {
        let total: f64 = p.iter().sum();
        if p.iter().any(|x| *x < -1e-10) || (total - 1.0).abs() > 1e-10 {
            return Err(CceError::NonPhysicalState(format!("populations of spin {i} must be non-negative and sum to 1")));
        }
        self.populations[i] = Some(p);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.populations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.populations.is_empty()
    }

    pub fn populations(&self, i: usize, dim: usize) -> Vec<f64> {
        match &self.populations[i] {
            Some(p) => p.clone(),
            None => vec![1.0 / dim as f64; dim],
        }
    }

    pub fn is_mixed(&self, i: usize) -> bool {
        self.populations[i].is_none()
    }

    pub fn is_fully_mixed(&self) -> bool {
        self.populations.iter().all(Option::is_none)
    }

    /// True when every spin is in a single `Sz` eigenstate.
    pub fn is_pure(&self) -> bool {
        self.populations
            .iter()
            .all(|p| p.as_ref().is_some_and(|p| p.iter().filter(|&&x| x > 0.0).count() == 1))
    }

    /// `⟨Iz⟩` of spin `i`.
    pub fn mean_z(&self, i: usize, bath: &[BathSpin]) -> f64 {
        let s = bath[i].species.s;
        match &self.populations[i] {
            None => 0.0,
            Some(p) => p.iter().enumerate().map(|(k, x)| x * s.m_of_index(k)).sum(),
        }
    }

    /// Density matrix of the listed members (ascending global indices).
    pub fn cluster_rho(&self, members: &[usize], bath: &[BathSpin]) -> CMatrix {
        let mut diag = vec![1.0];
        for &i in members {
            let p = self.populations(i, bath[i].species.s.dim());
            let mut next = Vec::with_capacity(diag.len() * p.len());
            for a in &diag {
                for b in &p {
                    next.push(a * b);
                }
            }
            diag = next;
        }
        let d = diag.len();
        let mut rho = CMatrix::zeros(d, d);
        for (k, x) in diag.into_iter().enumerate() {
            rho[(k, k)] = C64::new(x, 0.0);
        }
        rho
    }

    /// Draws a pure product state from these populations. Spins with index
    /// below `keep_mixed` are left as they are (hybrid inner shell). The
    /// generator is ChaCha20 seeded with `seed`, stream `sample`.
    pub fn sample(&self, bath: &[BathSpin], seed: u64, sample: u64, keep_mixed: usize) -> BathState {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(sample);
        let mut populations = Vec::with_capacity(self.populations.len());
        for (i, spin) in bath.iter().enumerate() {
            let d = spin.species.s.dim();
            let p = self.populations(i, d);
            let u: f64 = rng.random();
            if i < keep_mixed {
                populations.push(self.populations[i].clone());
                continue;
            }
            let mut acc = 0.0;
            let mut pick = d - 1;
            for (k, x) in p.iter().enumerate() {
                acc += x;
                if u < acc {
                    pick = k;
                    break;
                }
            }
            let mut one = vec![0.0; d];
            one[pick] = 1.0;
            populations.push(Some(one));
        }
        BathState { populations }
    }
}
