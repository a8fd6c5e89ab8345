#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use spindec::bath::{
    build_connectivity, compute_couplings, enumerate_clusters, generate_bath_with, BathSpin, ClusterSet, CouplingMode,
    GenerateOptions, Supercell,
};
use spindec::cce::{select_levels, BathState, SpinSystem};
use spindec::oracle::JointSystem;
use spindec::spinops::{
    assemble_cluster_hamiltonian, CentralSpin, IsotopeTable, LevelSelector, Spin, Tensor3, TensorUnit, ZeemanCoupling, Zfs,
};

pub const MHZ: f64 = 2.0 * PI * 1e3;

pub fn species(name: &str) -> spindec::spinops::SpinSpecies {
    IsotopeTable::builtin().get(name).unwrap().clone()
}

pub fn nv_center() -> CentralSpin {
    CentralSpin::electron(Spin::ONE, 2.0028, 2870.0 * MHZ, 0.0, LevelSelector::Sz(0.0, -1.0)).unwrap()
}

fn uniform(rng: &mut ChaCha20Rng, a: f64) -> f64 {
    rng.random_range(-a..a)
}

fn symmetric(rng: &mut ChaCha20Rng, a: f64) -> [f64; 9] {
    let (xx, yy, zz) = (uniform(rng, a), uniform(rng, a), uniform(rng, a));
    let (xy, xz, yz) = (uniform(rng, a), uniform(rng, a), uniform(rng, a));
    [xx, xy, xz, xy, yy, yz, xz, yz, zz]
}

fn traceless(rng: &mut ChaCha20Rng, a: f64) -> [f64; 9] {
    let mut q = symmetric(rng, a);
    let tr = (q[0] + q[4] + q[8]) / 3.0;
    q[0] -= tr;
    q[4] -= tr;
    q[8] -= tr;
    q
}

/// Pure-dephasing test system: central Hamiltonian diagonal in `Sz`, field
/// along z, and a hyperfine tensor whose only non-zero row is `z`, so the
/// central populations are conserved. Bath spins mix spin-1/2 and spin-1,
/// with random pair tensors and quadrupoles.
pub fn random_secular_system(seed: u64) -> SpinSystem {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=6usize);
    let max_spin1 = if n < 6 { 2 } else { 1 };
    let n1 = rng.random_range(1..=max_spin1);
    let mut bath = Vec::new();
    for k in 0..n {
        let name = if k < n1 { "2H" } else if k % 2 == 0 { "13C" } else { "1H" };
        let p = [uniform(&mut rng, 6.0), uniform(&mut rng, 6.0), uniform(&mut rng, 6.0)];
        let mut s = BathSpin::new(species(name), p);
        let a = [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, uniform(&mut rng, 3.0), uniform(&mut rng, 3.0), uniform(&mut rng, 6.0)];
        s.a = Some(Tensor3::from_components(&a, TensorUnit::AngularFrequency).unwrap());
        if name == "2H" {
            s.q = Some(Tensor3::from_components(&traceless(&mut rng, 2.0), TensorUnit::AngularFrequency).unwrap());
        }
        bath.push(s);
    }
    let (s, levels) = if rng.random_bool(0.5) {
        (Spin::HALF, LevelSelector::Sz(0.5, -0.5))
    } else {
        (Spin::ONE, LevelSelector::Sz(0.0, -1.0))
    };
    let central = CentralSpin::new(
        s,
        ZeemanCoupling::Gamma(uniform(&mut rng, 5.0)),
        Zfs::Axial {
            d: uniform(&mut rng, 20.0),
            e: 0.0,
        },
        levels,
    )
    .unwrap();
    let mut couplings = compute_couplings(&central, &bath, CouplingMode::PointDipole, &BTreeMap::new()).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            let t = Tensor3::from_components(&symmetric(&mut rng, 1.5), TensorUnit::AngularFrequency).unwrap();
            couplings.set_j(i, j, t);
        }
    }
    SpinSystem {
        central,
        bath,
        couplings,
        b: [0.0, 0.0, rng.random_range(0.5..3.0)],
    }
}

/// Every connected cluster up to the bath size.
pub fn all_clusters(sys: &SpinSystem) -> ClusterSet {
    let n = sys.bath.len();
    enumerate_clusters(&build_connectivity(&sys.bath, f64::INFINITY), n, n.max(6)).unwrap()
}

/// Whole system on the joint space with a maximally mixed bath.
pub fn joint_system(sys: &SpinSystem) -> JointSystem {
    let members: Vec<usize> = (0..sys.bath.len()).collect();
    let asm = assemble_cluster_hamiltonian(Some(&sys.central), &sys.bath, &sys.couplings, &members, sys.b).unwrap();
    let hs = asm.central.as_ref().unwrap().1.clone();
    let levels = select_levels(sys.central.levels, sys.central.s, &hs).unwrap();
    let rho = BathState::mixed(sys.bath.len()).cluster_rho(&members, &sys.bath);
    JointSystem::from_assembly(&asm, levels, rho).unwrap()
}

/// NV-like spin-1 centre at 500 G in a generated bath.
pub fn lattice_system(cell: &Supercell, radius: f64, seed: u64, stream: u64) -> SpinSystem {
    let mut opts = GenerateOptions::new(radius, seed);
    opts.stream = stream;
    let bath = generate_bath_with(cell, IsotopeTable::builtin(), &opts).unwrap();
    let central = nv_center();
    let couplings = compute_couplings(&central, &bath, CouplingMode::PointDipole, &BTreeMap::new()).unwrap();
    SpinSystem {
        central,
        bath,
        couplings,
        b: [0.0, 0.0, 500.0],
    }
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
