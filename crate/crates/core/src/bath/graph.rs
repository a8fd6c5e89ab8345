use std::collections::HashMap;

use super::{norm, sub, BathSpin};

/// Undirected graph over bath indices; edge iff the pair distance is at most
/// `r_dipole`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityGraph {
    adjacency: Vec<Vec<usize>>,
}

impl ConnectivityGraph {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in edges {
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        for a in &mut adjacency {
            a.sort_unstable();
            a.dedup();
        }
        Self { adjacency }
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}

/// All index pairs `(i, j)`, `i < j`, with `|r_i - r_j| <= cutoff`, in
/// lexicographic order. Uses a cell list for finite cutoffs.
pub fn neighbor_pairs(positions: &[[f64; 3]], cutoff: f64) -> Vec<(usize, usize)> {
    let n = positions.len();
    let mut pairs = Vec::new();
    if n < 2 || cutoff < 0.0 {
        return pairs;
    }
    let extent = positions
        .iter()
        .flat_map(|p| p.iter().map(|x| x.abs()))
        .fold(0.0f64, f64::max);
    if !cutoff.is_finite() || cutoff <= 0.0 || extent / cutoff > 1e6 || n < 64 {
        for i in 0..n {
            for j in i + 1..n {
                if norm(sub(positions[i], positions[j])) <= cutoff {
                    pairs.push((i, j));
                }
            }
        }
        return pairs;
    }
    let key = |p: &[f64; 3]| p.map(|x| (x / cutoff).floor() as i64);
    let mut cells: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in positions.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    for (i, p) in positions.iter().enumerate() {
        let c = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(list) = cells.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) {
                        for &j in list {
                            if j > i && norm(sub(*p, positions[j])) <= cutoff {
                                pairs.push((i, j));
                            }
                        }
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Connectivity by distance only; spins of different species are linked the
/// same way as like spins.
pub fn build_connectivity(bath: &[BathSpin], r_dipole: f64) -> ConnectivityGraph {
    let positions: Vec<[f64; 3]> = bath.iter().map(|s| s.position).collect();
    ConnectivityGraph::from_edges(bath.len(), &neighbor_pairs(&positions, r_dipole))
}
