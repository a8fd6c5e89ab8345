use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use super::{BathError, ConnectivityGraph};

pub const DEFAULT_MAX_ORDER: usize = 6;

/// Strictly ascending list of bath indices.
pub type Cluster = Vec<usize>;

/// Connected clusters grouped by size, each group in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterSet {
    levels: Vec<Vec<Cluster>>,
    index: HashMap<Cluster, (usize, usize)>,
}

impl ClusterSet {
    pub fn from_levels(levels: Vec<Vec<Cluster>>) -> Self {
        let mut index = HashMap::new();
        for (k, lvl) in levels.iter().enumerate() {
            for (i, c) in lvl.iter().enumerate() {
                index.insert(c.clone(), (k, i));
            }
        }
        Self { levels, index }
    }

    /// Largest cluster size present.
    pub fn order(&self) -> usize {
        self.levels.len()
    }

    /// Clusters of size `k` (1-based).
    pub fn of_size(&self, k: usize) -> &[Cluster] {
        self.levels.get(k.wrapping_sub(1)).map_or(&[], |v| v.as_slice())
    }

    pub fn levels(&self) -> &[Vec<Cluster>] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, c: &[usize]) -> bool {
        self.index.contains_key(c)
    }

    /// Position `(size - 1, rank)` of a cluster.
    pub fn position(&self, c: &[usize]) -> Option<(usize, usize)> {
        self.index.get(c).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Cluster> {
        self.levels.iter().flatten()
    }

    /// Keeps clusters up to size `n`.
    pub fn truncated(&self, n: usize) -> ClusterSet {
        ClusterSet::from_levels(self.levels.iter().take(n).cloned().collect())
    }
}

/// Proper non-empty subsets of `c`, as ascending index lists.
pub(crate) fn proper_subsets(c: &[usize]) -> impl Iterator<Item = Cluster> + '_ {
    let n = c.len();
    (1u64..(1u64 << n) - 1).map(move |mask| (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| c[k]).collect())
}

/// All connected vertex subsets of size `1..=order`.
///
/// Level `k + 1` is grown from level `k` by adding one neighbour; every
/// connected set of size `k + 1` has a connected subset of size `k`, so
/// nothing is missed.
pub fn enumerate_clusters(graph: &ConnectivityGraph, order: usize, cap: usize) -> Result<ClusterSet, BathError> {
    if order == 0 {
        return Err(BathError::ZeroOrder);
    }
    if order > cap {
        return Err(BathError::OrderCap { order, cap });
    }
    let n = graph.len();
    let mut levels: Vec<Vec<Cluster>> = Vec::new();
    if n == 0 {
        return Ok(ClusterSet::default());
    }
    levels.push((0..n).map(|i| vec![i]).collect());
    for _ in 1..order {
        let prev = levels.last().expect("at least one level");
        let grown: Vec<Vec<Cluster>> = prev
            .par_iter()
            .map(|c| {
                let mut out = Vec::new();
                for &v in c {
                    for &w in graph.neighbors(v) {
                        if c.binary_search(&w).is_err() {
                            let mut next = c.clone();
                            let pos = next.binary_search(&w).unwrap_err();
                            next.insert(pos, w);
                            out.push(next);
                        }
                    }
                }
                out
            })
            .collect();
        let set: HashSet<Cluster> = grown.into_iter().flatten().collect();
        if set.is_empty() {
            break;
        }
        let mut next: Vec<Cluster> = set.into_iter().collect();
        next.sort_unstable();
        levels.push(next);
    }
    Ok(ClusterSet::from_levels(levels))
}
