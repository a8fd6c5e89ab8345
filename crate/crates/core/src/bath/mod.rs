//! Bath construction: isotope placement on lattices, coupling tensors,
//! connectivity and cluster enumeration.

mod clusters;
mod couplings;
mod graph;
mod io;
mod lattice;

use thiserror::Error;

use crate::spinops::{SpinError, SpinSpecies, Tensor3};

pub(crate) use clusters::proper_subsets;
pub use clusters::{enumerate_clusters, Cluster, ClusterSet, DEFAULT_MAX_ORDER};
pub use couplings::{compute_couplings, compute_couplings_with, CouplingMode, Couplings};
pub use graph::{build_connectivity, neighbor_pairs, ConnectivityGraph};
pub use io::{parse_bath, parse_supercell, write_bath};
pub use lattice::{generate_bath, generate_bath_with, GenerateOptions, Supercell, DEFAULT_MAX_SPINS};

#[derive(Debug, Error)]
pub enum BathError {
    #[error("element `{0}` appears in the lattice but has no abundance entry")]
    EmptyAbundance(String),
    #[error("unknown isotope `{name}`; available: {available}")]
    UnknownIsotope { name: String, available: String },
    #[error("{source_name}:{line}: {msg}")]
    Parse { source_name: String, line: usize, msg: String },
    #[error("invalid lattice: {0}")]
    Lattice(String),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("cluster order {order} exceeds the cap {cap}")]
    OrderCap { order: usize, cap: usize },
    #[error("cluster order must be at least 1")]
    ZeroOrder,
    #[error("bath has {count} spins, more than the limit {limit}")]
    TooManySpins { count: usize, limit: usize },
    #[error(transparent)]
    Spin(#[from] SpinError),
}

/// Collapse operator acting on one bath spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpOp {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

impl JumpOp {
    pub fn parse(s: &str) -> Option<JumpOp> {
        match s.to_ascii_lowercase().as_str() {
            "x" | "ix" => Some(JumpOp::X),
            "y" | "iy" => Some(JumpOp::Y),
            "z" | "iz" => Some(JumpOp::Z),
            "plus" | "+" | "i+" => Some(JumpOp::Plus),
            "minus" | "-" | "i-" => Some(JumpOp::Minus),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            JumpOp::X => "x",
            JumpOp::Y => "y",
            JumpOp::Z => "z",
            JumpOp::Plus => "plus",
            JumpOp::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dissipator {
    /// rad/ms.
    pub rate: f64,
    pub jump: JumpOp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathSpin {
    pub species: SpinSpecies,
    /// Å, relative to the central spin.
    pub position: [f64; 3],
    /// Coupling to the central spin; filled by [`compute_couplings`] when absent.
    pub a: Option<Tensor3>,
    pub q: Option<Tensor3>,
    pub dissipators: Vec<Dissipator>,
}

impl BathSpin {
    pub fn new(species: SpinSpecies, position: [f64; 3]) -> Self {
        Self {
            species,
            position,
            a: None,
            q: None,
            dissipators: Vec::new(),
        }
    }

    pub fn distance(&self) -> f64 {
        norm(self.position)
    }
}

pub(crate) fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
