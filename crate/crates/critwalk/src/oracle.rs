//! Ground-truth component computation: union-find over materialized
//! instances of every model, and exhaustive enumeration of the largest
//! component's law for tiny binomial graphs.

use crate::error::{Error, Result};
use crate::intersection::BipartiteInstance;
use crate::quantum::QuantumInstance;
use crate::regular::Pairing;

/// Disjoint-set forest with path compression and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        DisjointSet { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    pub fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
    }

    /// Component sizes, sorted descending.
    pub fn component_sizes(&mut self) -> Vec<u64> {
        let n = self.parent.len();
        let mut count = vec![0u64; n];
        for x in 0..n as u32 {
            count[self.find(x) as usize] += 1;
        }
        let mut sizes: Vec<u64> = count.into_iter().filter(|&c| c > 0).collect();
        sizes.sort_unstable_by(|a, b| b.cmp(a));
        sizes
    }
}

/// Component sizes of a plain edge list on `n` nodes, sorted descending.
pub fn component_sizes_from_edges(n: usize, edges: &[(u32, u32)]) -> Vec<u64> {
    let mut dsu = DisjointSet::new(n);
    for &(u, v) in edges {
        dsu.union(u, v);
    }
    dsu.component_sizes()
}

/// A realized instance of one of the four models, the unit of ground-truth
/// component computation.
#[derive(Debug, Clone)]
pub enum MaterializedInstance {
    /// Simple graph on n vertices.
    SimpleGraph(crate::er::ErInstance),
    /// Configuration-model pairing with one retention mark per matched pair.
    Percolated { pairing: Pairing, retention: Vec<bool> },
    /// Bipartite incidence with its projection; components are over vertices.
    Bipartite(BipartiteInstance),
    /// Quantum instance; components are over intervals.
    Quantum(QuantumInstance),
}

/// Exact component-size multiset of the instance, sorted descending. Units
/// match the variant: vertices, or intervals for the quantum model.
pub fn union_find_components(instance: &MaterializedInstance) -> Result<Vec<u64>> {
    match instance {
        MaterializedInstance::SimpleGraph(g) => Ok(component_sizes_from_edges(g.n, &g.edges)),
        MaterializedInstance::Percolated { pairing, retention } => {
            if retention.len() != pairing.pairs.len() {
                return Err(Error::InvalidInstance(format!(
                    "retention has {} marks for {} pairs",
                    retention.len(),
                    pairing.pairs.len()
                )));
            }
            Ok(component_sizes_from_edges(pairing.n, &pairing.percolated_edges(retention)))
        }
        MaterializedInstance::Bipartite(b) => {
            Ok(component_sizes_from_edges(b.n, &b.projection))
        }
        MaterializedInstance::Quantum(q) => {
            q.validate()?;
            Ok(component_sizes_from_edges(q.total_intervals(), &q.interval_graph_edges()))
        }
    }
}

pub const ENUMERATION_CAP: usize = 5;

/// Exact law of |C_max| for G(n, p) by summing `p^e (1-p)^(C(n,2)-e)` over
/// all 2^C(n,2) graphs. Entry `c - 1` holds P(C_max = c).
pub fn enumerate_er_cmax(n: usize, p: f64) -> Result<Vec<f64>> {
    if n == 0 || n > ENUMERATION_CAP {
        return Err(Error::InvalidParameter(format!(
            "exhaustive enumeration supports 1 <= n <= {ENUMERATION_CAP}, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p must lie in [0,1], got {p}")));
    }
    let pairs: Vec<(u32, u32)> = (0..n as u32)
        .flat_map(|u| ((u + 1)..n as u32).map(move |v| (u, v)))
        .collect();
    let m = pairs.len();
    let mut law = vec![0.0f64; n];
    for mask in 0u32..(1u32 << m) {
        let edges: Vec<(u32, u32)> = (0..m)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| pairs[i])
            .collect();
        let cmax = component_sizes_from_edges(n, &edges)[0];
        let e = edges.len() as i32;
        law[cmax as usize - 1] += p.powi(e) * (1.0 - p).powi(m as i32 - e);
    }
    Ok(law)
}
