use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::bath::{
    build_connectivity, enumerate_clusters, proper_subsets, BathSpin, Cluster, ClusterSet, ConnectivityGraph,
    Couplings, DEFAULT_MAX_ORDER,
};
use crate::linalg::{CMatrix, C64};
use crate::spinops::{assemble_cluster_hamiltonian, CentralSpin, ClusterAssembly, SpinError};

use super::coherence::{joint_coherence, projected_series};
use super::{
    check_times, jump_operator, lindblad_cluster, mean_field_levels, project_hamiltonian, select_levels, BathState,
    CceError, PulseSequence, QubitLevels,
};

pub const DEFAULT_EPSILON: f64 = 1e-10;
/// Runs with a larger fraction of guarded clusters are reported as not
/// converged.
pub const GUARDED_FRACTION_LIMIT: f64 = 1e-3;
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Central spin, bath and couplings in a static field `b` (Gauss).
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub central: CentralSpin,
    pub bath: Vec<BathSpin>,
    pub couplings: Couplings,
    pub b: [f64; 3],
}

impl SpinSystem {
    /// Keeps bath spins within `radius` of the central spin.
    pub fn within(&self, radius: f64) -> SpinSystem {
        if !radius.is_finite() {
            return self.clone();
        }
        let keep: Vec<usize> = (0..self.bath.len())
            .filter(|&i| crate::bath::norm(crate::bath::sub(self.bath[i].position, self.central.position)) <= radius)
            .collect();
        SpinSystem {
            central: self.central.clone(),
            bath: keep.iter().map(|&i| self.bath[i].clone()).collect(),
            couplings: self.couplings.subset(&keep),
            b: self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cce,
    Gcce,
    CceSampled,
    GcceSampled,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cce => "cce",
            Method::Gcce => "gcce",
            Method::CceSampled => "cce-sampled",
            Method::GcceSampled => "gcce-sampled",
        }
    }

    pub fn is_generalized(self) -> bool {
        matches!(self, Method::Gcce | Method::GcceSampled)
    }

    pub fn is_sampled(self) -> bool {
        matches!(self, Method::CceSampled | Method::GcceSampled)
    }

    pub const ALL: [Method; 4] = [Method::Cce, Method::Gcce, Method::CceSampled, Method::GcceSampled];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CceError::Config(format!("unknown method '{s}' (expected cce, gcce, cce-sampled or gcce-sampled)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineConfig {
    pub method: Method,
    pub order: usize,
    /// Å; pairs closer than this are connected.
    pub r_dipole: f64,
    /// Å; bath spins further from the central spin are dropped.
    pub bath_radius: f64,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    /// Qubit levels from the central Hamiltonian including the Overhauser
    /// field of the (sampled) bath state.
    pub mean_field: bool,
    /// Number of closest bath spins kept mixed when sampling.
    pub hybrid_inner: usize,
    /// Largest cluster Hilbert-space dimension.
    pub max_dim: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            method: Method::Cce,
            order: 2,
            r_dipole: 8.0,
            bath_radius: f64::INFINITY,
            samples: 1,
            seed: 0,
            epsilon: DEFAULT_EPSILON,
            mean_field: false,
            hybrid_inner: 0,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), CceError> {
        if !(self.epsilon > 0.0) {
            return Err(CceError::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.order == 0 {
            return Err(CceError::Config("order must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(CceError::Config("sample count must be at least 1".into()));
        }
        if !(self.r_dipole >= 0.0) || !(self.bath_radius >= 0.0) {
            return Err(CceError::Config("r_dipole and bath_radius must be non-negative".into()));
        }
        Ok(())
    }
}

/// Run report attached to every curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub method: Method,
    pub order: usize,
    pub r_dipole: f64,
    pub bath_radius: f64,
    pub bath_spins: usize,
    pub clusters_per_order: Vec<usize>,
    /// Clusters whose contribution was forced to 1 at one or more times
    /// (summed over samples).
    pub guarded: usize,
    pub guarded_fraction: f64,
    /// `max_t |L_n − L_{n−1}|` for `n = 2..=order`.
    pub order_deltas: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub converged: bool,
    pub omega: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
    pub diagnostics: Diagnostics,
}

impl CoherenceCurve {
    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }
}

const PT_NOTE: &str = "second-order corrections to the projected Hamiltonians are not included";

/// Product of irreducible contributions truncated at each order, plus the
/// number of guarded clusters.
struct Expansion {
    per_order: Vec<Vec<C64>>,
    guarded: usize,
    clusters: usize,
}

/// Fails if a connected proper subset of some cluster is absent.
fn check_closure(clusters: &ClusterSet, graph: &ConnectivityGraph) -> Result<(), CceError> {
    for c in clusters.iter() {
        for sub in proper_subsets(c) {
            if !clusters.contains(&sub) && is_connected(&sub, graph) {
                return Err(CceError::MissingSubcluster(sub));
            }
        }
    }
    Ok(())
}

fn is_connected(c: &[usize], graph: &ConnectivityGraph) -> bool {
    let mut seen = vec![false; c.len()];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(k) = stack.pop() {
        for (l, &j) in c.iter().enumerate() {
            if !seen[l] && graph.has_edge(c[k], j) {
                seen[l] = true;
                stack.push(l);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// `L̃_C = L_C / Π_{C' ⊂ C} L̃_{C'}` level by level; returns per-order
/// products. Contributions at times where the divisor is below `epsilon` are
/// set to 1.
fn reduce<F>(clusters: &ClusterSet, n_times: usize, epsilon: f64, eval: F) -> Result<Expansion, CceError>
where
    F: Fn(&Cluster) -> Result<Vec<C64>, CceError> + Sync,
{
    let one = C64::new(1.0, 0.0);
    let mut irreducible: HashMap<Cluster, Vec<C64>> = HashMap::new();
    let mut running = vec![one; n_times];
    let mut per_order = Vec::new();
    let mut guarded = 0;
    for level in clusters.levels() {
        let raw: Vec<Vec<C64>> = level.par_iter().map(&eval).collect::<Result<_, _>>()?;
        let reduced: Vec<(Vec<C64>, bool)> = level
            .par_iter()
            .zip(raw)
            .map(|(c, mut l)| {
                let mut den = vec![one; n_times];
                for sub in proper_subsets(c) {
                    if let Some(s) = irreducible.get(&sub) {
                        den.iter_mut().zip(s).for_each(|(d, v)| *d *= v);
                    }
                }
                let mut hit = false;
                for (v, d) in l.iter_mut().zip(&den) {
                    if d.norm() < epsilon {
                        *v = one;
                        hit = true;
                    } else {
                        *v /= d;
                    }
                }
                (l, hit)
            })
            .collect();
        for (c, (l, hit)) in level.iter().zip(reduced) {
            guarded += hit as usize;
            running.iter_mut().zip(&l).for_each(|(r, v)| *r *= v);
            irreducible.insert(c.clone(), l);
        }
        per_order.push(running.clone());
    }
    Ok(Expansion {
        per_order,
        guarded,
        clusters: clusters.len(),
    })
}

/// Overhauser field `f_a = Σ_k A_k[a][z] ⟨I_z,k⟩` on the central spin from
/// the bath spins for which `include(k)` holds.
fn overhauser(system: &SpinSystem, state: &BathState, include: impl Fn(usize) -> bool) -> Result<[f64; 3], CceError> {
    let mut f = [0.0; 3];
    for k in 0..system.bath.len() {
        if !include(k) || state.is_mixed(k) {
            continue;
        }
        let m = state.mean_z(k, &system.bath);
        if m == 0.0 {
            continue;
        }
        let a = system.couplings.a(k).ok_or(SpinError::MissingHyperfine(k))?.to_angular();
        for (i, fi) in f.iter_mut().enumerate() {
            *fi += a.m[i][2] * m;
        }
    }
    Ok(f)
}

fn assemble(system: &SpinSystem, cluster: &[usize], max_dim: usize, with_central: bool) -> Result<ClusterAssembly, CceError> {
    let mut dim: usize = cluster.iter().map(|&i| system.bath[i].species.s.dim()).product();
    if with_central {
        dim *= system.central.s.dim();
    }
    if dim > max_dim {
        return Err(CceError::DimensionOverflow { dim, limit: max_dim });
    }
    Ok(assemble_cluster_hamiltonian(
        Some(&system.central),
        &system.bath,
        &system.couplings,
        cluster,
        system.b,
    )?)
}

fn has_dissipators(system: &SpinSystem, cluster: &[usize]) -> bool {
    cluster.iter().any(|&i| !system.bath[i].dissipators.is_empty())
}

fn projected_cluster(
    system: &SpinSystem,
    state: &BathState,
    levels: &QubitLevels,
    config: &EngineConfig,
    pulses: &PulseSequence,
    times: &[f64],
    cluster: &Cluster,
) -> Result<Vec<C64>, CceError> {
    let asm = assemble(system, cluster, config.max_dim, false)?;
    let pair = project_hamiltonian(&asm, levels)?;
    let rho = state.cluster_rho(&asm.members, &system.bath);
    if has_dissipators(system, cluster) {
        let mut jumps = Vec::new();
        for (k, &i) in asm.members.iter().enumerate() {
            for d in &system.bath[i].dissipators {
                jumps.push((jump_operator(&asm.bath_ops[k], d.jump), d.rate));
            }
        }
        return lindblad_cluster(&pair, &rho, &jumps, pulses, times);
    }
    let eig = [
        crate::linalg::HermitianEigen::new(&pair.h0),
        crate::linalg::HermitianEigen::new(&pair.h1),
    ];
    Ok(projected_series(&eig, &rho, pulses, times))
}

/// Bath-free central-spin coherence under `H_S + Σ_a f_a S_a`.
fn reference(
    system: &SpinSystem,
    levels: &QubitLevels,
    field: [f64; 3],
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<Vec<C64>, CceError> {
    let asm = assemble_cluster_hamiltonian(Some(&system.central), &system.bath, &system.couplings, &[], system.b);
    let mut asm = asm?;
    asm.add_central_field(field);
    let h = asm.full().matrix;
    let one = CMatrix::identity(1, 1);
    let r = joint_coherence(&h, 1, levels, &one, pulses, times)?;
    if let Some(k) = r.iter().position(|v| v.norm() < 1e-12) {
        return Err(CceError::InvalidLevels(format!(
            "bath-free reference vanishes at t = {} ms; select eigenstate levels",
            times[k]
        )));
    }
    Ok(r)
}

#[allow(clippy::too_many_arguments)]
fn generalized_cluster(
    system: &SpinSystem,
    state: &BathState,
    levels: &QubitLevels,
    use_mean_field: bool,
    reference: &[C64],
    config: &EngineConfig,
    pulses: &PulseSequence,
    times: &[f64],
    cluster: &Cluster,
) -> Result<Vec<C64>, CceError> {
    if has_dissipators(system, cluster) {
        return Err(CceError::Config(
            "dissipative bath spins are only supported by the projected engines".into(),
        ));
    }
    let mut asm = assemble(system, cluster, config.max_dim, true)?;
    if use_mean_field {
        let outside = overhauser(system, state, |k| !cluster.contains(&k))?;
        asm.add_central_field(outside);
    }
    let h = asm.full();
    let rho = state.cluster_rho(&asm.members, &system.bath);
    let l = joint_coherence(&h.matrix, asm.bath_dim(), levels, &rho, pulses, times)?;
    Ok(l.into_iter().zip(reference).map(|(v, r)| v / r).collect())
}

/// Cluster expansion for one bath state. Returns `L(t)` truncated at every
/// order together with the guard count.
fn expand_state(
    system: &SpinSystem,
    clusters: &ClusterSet,
    config: &EngineConfig,
    state: &BathState,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<(Expansion, f64), CceError> {
    let bare = select_levels(system.central.levels, system.central.s, &system.central.hamiltonian(system.b)?)?;
    let field = if config.mean_field {
        overhauser(system, state, |_| true)?
    } else {
        [0.0; 3]
    };
    let levels = if config.mean_field {
        mean_field_levels(&system.central, system.b, field)?
    } else {
        bare.clone()
    };
    let mut exp = if config.method.is_generalized() {
        let reference_full = reference(system, &levels, field, pulses, times)?;
        let mut exp = reduce(clusters, times.len(), config.epsilon, |c| {
            generalized_cluster(system, state, &levels, config.mean_field, &reference_full, config, pulses, times, c)
        })?;
        if config.mean_field {
            // restore the mean-field shift of the central spin relative to the bare reference
            let reference_bare = reference(system, &bare, [0.0; 3], pulses, times)?;
            let shift: Vec<C64> = reference_full.iter().zip(&reference_bare).map(|(f, b)| f / b).collect();
            for l in exp.per_order.iter_mut() {
                l.iter_mut().zip(&shift).for_each(|(v, s)| *v *= s);
            }
        }
        exp
    } else {
        reduce(clusters, times.len(), config.epsilon, |c| {
            projected_cluster(system, state, &levels, config, pulses, times, c)
        })?
    };
    for l in exp.per_order.iter_mut() {
        for (v, &t) in l.iter_mut().zip(times) {
            if t == 0.0 {
                *v = C64::new(1.0, 0.0);
            }
        }
    }
    Ok((exp, levels.omega()))
}

fn diagnostics(config: &EngineConfig, system: &SpinSystem, clusters: &ClusterSet, per_order: &[Vec<C64>], guarded: usize, total: usize, omega: f64) -> Diagnostics {
    let order_deltas = per_order
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
        .collect();
    let guarded_fraction = if total == 0 { 0.0 } else { guarded as f64 / total as f64 };
    let mut notes = Vec::new();
    if !config.method.is_generalized() {
        notes.push(PT_NOTE.to_string());
    }
    if config.method.is_generalized() {
        notes.push("normalized by the bath-free central-spin evolution".to_string());
    }
    Diagnostics {
        method: config.method,
        order: config.order,
        r_dipole: config.r_dipole,
        bath_radius: config.bath_radius,
        bath_spins: system.bath.len(),
        clusters_per_order: clusters.levels().iter().map(Vec::len).collect(),
        guarded,
        guarded_fraction,
        order_deltas,
        samples: if config.method.is_sampled() { config.samples } else { 1 },
        seed: config.seed,
        epsilon: config.epsilon,
        converged: guarded_fraction <= GUARDED_FRACTION_LIMIT,
        omega,
        notes,
    }
}

fn curve(
    system: &SpinSystem,
    clusters: &ClusterSet,
    config: &EngineConfig,
    times: &[f64],
    exp: Expansion,
    omega: f64,
) -> CoherenceCurve {
    let values = exp.per_order.last().cloned().unwrap_or_else(|| vec![C64::new(1.0, 0.0); times.len()]);
    CoherenceCurve {
        times: times.to_vec(),
        values,
        diagnostics: diagnostics(config, system, clusters, &exp.per_order, exp.guarded, exp.clusters, omega),
    }
}

fn prepare(system: &SpinSystem, clusters: &ClusterSet, config: &EngineConfig, times: &[f64]) -> Result<(), CceError> {
    config.validate()?;
    check_times(times)?;
    if clusters.iter().any(|c| c.iter().any(|&i| i >= system.bath.len())) {
        return Err(CceError::Config("cluster refers to a spin outside the bath".into()));
    }
    check_closure(clusters, &build_connectivity(&system.bath, config.r_dipole))
}

/// Expansion for an explicit bath state, using the engine selected by
/// `config.method` (sampling is not applied here).
pub fn expand_with_state(
    system: &SpinSystem,
    clusters: &ClusterSet,
    config: &EngineConfig,
    state: &BathState,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<CoherenceCurve, CceError> {
    prepare(system, clusters, config, times)?;
    if state.len() != system.bath.len() {
        return Err(CceError::NonPhysicalState("bath state size does not match the bath".into()));
    }
    let (exp, omega) = expand_state(system, clusters, config, state, pulses, times)?;
    Ok(curve(system, clusters, config, times, exp, omega))
}

/// Projected-Hamiltonian CCE over a thermal (maximally mixed) bath.
pub fn cce_expand(
    system: &SpinSystem,
    clusters: &ClusterSet,
    config: &EngineConfig,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<CoherenceCurve, CceError> {
    let config = EngineConfig {
        method: Method::Cce,
        ..config.clone()
    };
    expand_with_state(system, clusters, &config, &BathState::mixed(system.bath.len()), pulses, times)
}

/// Generalized CCE over a thermal bath.
pub fn gcce_expand(
    system: &SpinSystem,
    clusters: &ClusterSet,
    config: &EngineConfig,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<CoherenceCurve, CceError> {
    let config = EngineConfig {
        method: Method::Gcce,
        ..config.clone()
    };
    expand_with_state(system, clusters, &config, &BathState::mixed(system.bath.len()), pulses, times)
}

/// Average of the expansion over `config.samples` pure product states drawn
/// from `base` (the closest `config.hybrid_inner` spins are kept as in
/// `base`). Sample `i` uses ChaCha20 seeded with `config.seed`, stream `i`.
pub fn sampled_expand(
    system: &SpinSystem,
    clusters: &ClusterSet,
    config: &EngineConfig,
    base: &BathState,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<CoherenceCurve, CceError> {
    prepare(system, clusters, config, times)?;
    if base.len() != system.bath.len() {
        return Err(CceError::NonPhysicalState("bath state size does not match the bath".into()));
    }
    let mut sum: Option<Vec<Vec<C64>>> = None;
    let mut guarded = 0;
    let mut omega = 0.0;
    for s in 0..config.samples {
        let state = base.sample(&system.bath, config.seed, s as u64, config.hybrid_inner);
        let (exp, w) = expand_state(system, clusters, config, &state, pulses, times)?;
        guarded += exp.guarded;
        omega += w / config.samples as f64;
        match sum.as_mut() {
            None => sum = Some(exp.per_order),
            Some(acc) => {
                for (a, l) in acc.iter_mut().zip(exp.per_order) {
                    a.iter_mut().zip(l).for_each(|(x, y)| *x += y);
                }
            }
        }
    }
    let m = C64::new(1.0 / config.samples as f64, 0.0);
    let mut per_order = sum.unwrap_or_default();
    for l in per_order.iter_mut() {
        for (v, &t) in l.iter_mut().zip(times) {
            *v = if t == 0.0 { C64::new(1.0, 0.0) } else { *v * m };
        }
    }
    let exp = Expansion {
        per_order,
        guarded,
        clusters: clusters.len() * config.samples,
    };
    Ok(curve(system, clusters, config, times, exp, omega))
}

/// Full pipeline: radius cut, connectivity, cluster enumeration and the
/// engine selected by `config.method`.
pub fn simulate(
    system: &SpinSystem,
    config: &EngineConfig,
    pulses: &PulseSequence,
    times: &[f64],
) -> Result<(CoherenceCurve, SpinSystem), CceError> {
    config.validate()?;
    let sys = system.within(config.bath_radius);
    let graph = build_connectivity(&sys.bath, config.r_dipole);
    let clusters = enumerate_clusters(&graph, config.order, config.order.max(DEFAULT_MAX_ORDER))?;
    log::info!(
        "{} bath spins, {} clusters up to order {}",
        sys.bath.len(),
        clusters.len(),
        config.order
    );
    let base = BathState::mixed(sys.bath.len());
    let curve = if config.method.is_sampled() {
        sampled_expand(&sys, &clusters, config, &base, pulses, times)?
    } else {
        expand_with_state(&sys, &clusters, config, &base, pulses, times)?
    };
    if !curve.diagnostics.converged {
        log::warn!(
            "{:.3}% of clusters hit the division guard",
            100.0 * curve.diagnostics.guarded_fraction
        );
    }
    Ok((curve, sys))
}
