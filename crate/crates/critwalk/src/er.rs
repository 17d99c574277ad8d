//! Near-critical binomial random graph: one-vertex-per-step exploration walk,
//! small-instance materialization and deterministic replay on realized graphs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{ComponentProfile, WalkRecorder};
use crate::rng::{sample_binomial, RngStream};

/// Default cap on materialized instance sizes.
pub const ORACLE_CAP: usize = 10_000;

/// Parameters of G(n, p) with p = (1 + lambda n^{-1/3}) / n in the scaling
/// window, or an explicit override for edge cases the window cannot express.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErParams {
    n: usize,
    lambda: f64,
    p_override: Option<f64>,
}

impl ErParams {
    pub fn new(n: usize, lambda: f64, p_override: Option<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("er: n must be positive".into()));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("er: lambda must be finite".into()));
        }
        let params = ErParams { n, lambda, p_override };
        let p = params.edge_prob();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "er: edge probability {p} outside [0,1] for n={n}, lambda={lambda}"
            )));
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Retention probability: the override when present, else the window formula.
    pub fn edge_prob(&self) -> f64 {
        match self.p_override {
            Some(p) => p,
            None => {
                let n = self.n as f64;
                (1.0 + self.lambda * n.powf(-1.0 / 3.0)) / n
            }
        }
    }
}

/// Runs the exploration walk for exactly n steps.
///
/// At step t the walk draws `eta ~ Bin(U - [Y = 0], p)` with
/// `U = n - (t-1) - Y` unseen vertices, subtracting one when a fresh seed
/// vertex leaves the unseen class. Component sizes are the excursion lengths.
pub fn explore(params: &ErParams, stream: &mut RngStream) -> ComponentProfile {
    let n = params.n as u64;
    let p = params.edge_prob();
    let mut rec = WalkRecorder::new();
    let mut active: u64 = 0;
    for t in 1..=n {
        let unseen = n - (t - 1) - active;
        let count = if active == 0 { unseen - 1 } else { unseen };
        let eta = sample_binomial(count, p, stream).expect("validated p");
        active = if active == 0 { eta } else { active + eta - 1 };
        rec.record(t, active);
    }
    debug_assert_eq!(active, 0);
    rec.into_unit_profile(n)
}

/// A realized simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErInstance {
    pub n: usize,
    pub edges: Vec<(u32, u32)>,
}

impl ErInstance {
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidInstance(format!(
                    "edge ({u},{v}) out of range for n={n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidInstance(format!("self-loop at {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::InvalidInstance(format!("duplicate edge ({u},{v})")));
            }
        }
        Ok(ErInstance { n, edges })
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        adj
    }
}

/// Samples every unordered pair independently with probability p, via
/// geometric skips over the linearized pair index.
pub fn materialize(params: &ErParams, stream: &mut RngStream) -> Result<ErInstance> {
    if params.n > ORACLE_CAP {
        return Err(Error::SizeCap { requested: params.n, cap: ORACLE_CAP });
    }
    let n = params.n;
    let p = params.edge_prob();
    let total: u64 = (n as u64) * (n as u64 - 1) / 2;
    let mut edges = Vec::new();
    if p >= 1.0 {
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        return Ok(ErInstance { n, edges });
    }
    if p > 0.0 {
        // skip-sample: gaps between successes are geometric
        let log_q = (-p).ln_1p();
        let mut idx: u64 = 0;
        loop {
            let u = stream.next_f64();
            let skip = ((1.0 - u).ln() / log_q).floor() as u64;
            idx = match idx.checked_add(skip) {
                Some(x) => x,
                None => break,
            };
            if idx >= total {
                break;
            }
            edges.push(pair_from_index(n as u64, idx));
            idx += 1;
        }
    }
    Ok(ErInstance { n, edges })
}

/// Inverse of the row-major enumeration of unordered pairs (u < v).
fn pair_from_index(n: u64, idx: u64) -> (u32, u32) {
    let mut u = 0u64;
    let mut remaining = idx;
    let mut row = n - 1;
    while remaining >= row {
        remaining -= row;
        u += 1;
        row -= 1;
    }
    (u as u32, (u + 1 + remaining) as u32)
}

/// Deterministic replay of the exploration on a realized graph, following a
/// vertex ordering. The component multiset equals the true components.
pub fn explore_on_graph(instance: &ErInstance, ordering: &[u32]) -> Result<ComponentProfile> {
    let n = instance.n;
    if ordering.len() != n {
        return Err(Error::InvalidParameter(format!(
            "ordering length {} != n {}",
            ordering.len(),
            n
        )));
    }
    let mut position = vec![u32::MAX; n];
    for (rank, &v) in ordering.iter().enumerate() {
        if v as usize >= n || position[v as usize] != u32::MAX {
            return Err(Error::InvalidParameter("ordering must be a permutation".into()));
        }
        position[v as usize] = rank as u32;
    }
    let adj = instance.adjacency();

    #[derive(Clone, Copy, PartialEq)]
    enum St {
        Unseen,
        Active,
        Explored,
    }
    let mut status = vec![St::Unseen; n];
    // active set ordered by the fixed ordering
    let mut active_set = std::collections::BTreeSet::new();
    let mut next_unseen_rank = 0usize;
    let mut active_count: u64 = 0;
    let mut rec = WalkRecorder::new();

    for t in 1..=n as u64 {
        let u = if let Some(&rank) = active_set.iter().next() {
            ordering[rank as usize] as usize
        } else {
            while status[ordering[next_unseen_rank] as usize] != St::Unseen {
                next_unseen_rank += 1;
            }
            let u = ordering[next_unseen_rank] as usize;
            status[u] = St::Active;
            active_set.insert(position[u]);
            active_count += 1;
            u
        };
        for &w in &adj[u] {
            if status[w as usize] == St::Unseen {
                status[w as usize] = St::Active;
                active_set.insert(position[w as usize]);
                active_count += 1;
            }
        }
        status[u] = St::Explored;
        active_set.remove(&position[u]);
        active_count -= 1;
        rec.record(t, active_count);
    }
    Ok(rec.into_unit_profile(n as u64))
}

/// The natural ordering 0..n.
pub fn natural_ordering(n: usize) -> Vec<u32> {
    (0..n as u32).collect()
}
