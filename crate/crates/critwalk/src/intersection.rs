//! Random intersection graph: vertices are adjacent when they share at least
//! one attribute of a percolated bipartite structure. The exploration tracks
//! only the count of discovered attributes, which the conditional laws depend
//! on exclusively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{ComponentProfile, WalkRecorder};
use crate::rng::{sample_binomial, RngStream};

pub const ORACLE_CAP: usize = 4096;

/// Parameters with k = floor(beta * n) attributes and per-link probability
/// p = gamma / n; the model is critical when beta * gamma^2 = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntersectionParams {
    n: usize,
    beta: f64,
    gamma: f64,
}

impl IntersectionParams {
    pub fn new(n: usize, beta: f64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("intersection: n must be positive".into()));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter("intersection: beta must be positive".into()));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::InvalidParameter(
                "intersection: gamma must be nonnegative".into(),
            ));
        }
        let params = IntersectionParams { n, beta, gamma };
        if params.k() < 1 {
            return Err(Error::InvalidParameter(format!(
                "intersection: k = floor(beta*n) must be >= 1, got beta={beta}, n={n}"
            )));
        }
        let p = params.link_prob();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "intersection: link probability {p} outside [0,1]"
            )));
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Number of attributes, floor(beta * n) exactly.
    pub fn k(&self) -> u64 {
        (self.beta * self.n as f64).floor() as u64
    }

    pub fn link_prob(&self) -> f64 {
        self.gamma / self.n as f64
    }

    /// Set iff |beta * gamma^2 - 1| < 1e-12.
    pub fn is_critical(&self) -> bool {
        (self.beta * self.gamma * self.gamma - 1.0).abs() < 1e-12
    }
}

/// Outcome of an exploration trial: the profile plus the total number of
/// attributes discovered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionTrial {
    pub profile: ComponentProfile,
    pub attributes_discovered: u64,
}

/// Runs the exploration for exactly n steps. At step t the walk draws the
/// fresh-attribute count `N ~ Bin(k - |D|, p)` for the explored vertex, then
/// `eta ~ Bin(U - [Y = 0], 1 - (1-p)^N)` new active vertices.
pub fn explore(params: &IntersectionParams, stream: &mut RngStream) -> IntersectionTrial {
    let n = params.n as u64;
    let k = params.k();
    let p = params.link_prob();
    let log_one_minus_p = (-p).ln_1p();
    let mut discovered: u64 = 0;
    let mut active: u64 = 0;
    let mut rec = WalkRecorder::new();
    for t in 1..=n {
        let fresh = k - discovered;
        let n_t = sample_binomial(fresh, p, stream).expect("validated p");
        discovered += n_t;
        // 1 - (1-p)^N, evaluated stably for tiny p; N = 0 must not hit 0 * ln(0)
        let succ = if n_t == 0 { 0.0 } else { -(n_t as f64 * log_one_minus_p).exp_m1() };
        let unseen = n - (t - 1) - active;
        let count = if active == 0 { unseen - 1 } else { unseen };
        let eta = sample_binomial(count, succ, stream).expect("probability in [0,1]");
        active = if active == 0 { eta } else { active + eta - 1 };
        rec.record(t, active);
        debug_assert!(discovered <= k);
    }
    debug_assert_eq!(active, 0);
    IntersectionTrial { profile: rec.into_unit_profile(n), attributes_discovered: discovered }
}

/// Monte Carlo mean of the first-step offspring count from a fresh start;
/// at criticality the mean is at most n*k*p^2 <= 1 and tends to 1.
pub fn mean_offspring_check(
    params: &IntersectionParams,
    samples: u64,
    stream: &mut RngStream,
) -> f64 {
    let n = params.n as u64;
    let k = params.k();
    let p = params.link_prob();
    let log_one_minus_p = (-p).ln_1p();
    let mut total: u64 = 0;
    for _ in 0..samples {
        let n_1 = sample_binomial(k, p, stream).expect("validated p");
        let succ = if n_1 == 0 { 0.0 } else { -(n_1 as f64 * log_one_minus_p).exp_m1() };
        total += sample_binomial(n - 1, succ, stream).expect("probability in [0,1]");
    }
    total as f64 / samples as f64
}

/// A realized bipartite incidence together with its projection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteInstance {
    pub n: usize,
    pub k: usize,
    /// (vertex, attribute) links.
    pub links: Vec<(u32, u32)>,
    /// Simple projected graph: vertices sharing at least one attribute.
    pub projection: Vec<(u32, u32)>,
}

impl BipartiteInstance {
    pub fn new(n: usize, k: usize, links: Vec<(u32, u32)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for &(v, a) in &links {
            if v as usize >= n || a as usize >= k {
                return Err(Error::InvalidInstance(format!("link ({v},{a}) out of range")));
            }
            if !seen.insert((v, a)) {
                return Err(Error::InvalidInstance(format!("duplicate link ({v},{a})")));
            }
        }
        let projection = project(n, k, &links);
        Ok(BipartiteInstance { n, k, links, projection })
    }

    /// Recomputes the projection from the incidence (consistency oracle).
    pub fn recount_projection(&self) -> Vec<(u32, u32)> {
        project(self.n, self.k, &self.links)
    }
}

fn project(_n: usize, k: usize, links: &[(u32, u32)]) -> Vec<(u32, u32)> {
    let mut per_attribute: Vec<Vec<u32>> = vec![Vec::new(); k];
    for &(v, a) in links {
        per_attribute[a as usize].push(v);
    }
    let mut edges = std::collections::BTreeSet::new();
    for members in &mut per_attribute {
        members.sort_unstable();
        for i in 0..members.len() {
            for j in (i + 1)..members.len() {
                edges.insert((members[i], members[j]));
            }
        }
    }
    edges.into_iter().collect()
}

/// Samples the bipartite incidence with independent Bernoulli(p) links,
/// using geometric skips over the n*k cells.
pub fn materialize(params: &IntersectionParams, stream: &mut RngStream) -> Result<BipartiteInstance> {
    if params.n > ORACLE_CAP {
        return Err(Error::SizeCap { requested: params.n, cap: ORACLE_CAP });
    }
    let n = params.n as u64;
    let k = params.k();
    let p = params.link_prob();
    let total = n * k;
    let mut links = Vec::new();
    if p >= 1.0 {
        for v in 0..n as u32 {
            for a in 0..k as u32 {
                links.push((v, a));
            }
        }
    } else if p > 0.0 {
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
            links.push(((idx / k) as u32, (idx % k) as u32));
            idx += 1;
        }
    }
    BipartiteInstance::new(params.n, k as usize, links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_stream;

    #[test]
    fn params_derived_quantities() {
        let p = IntersectionParams::new(100, 1.0, 1.0).unwrap();
        assert_eq!(p.k(), 100);
        assert!((p.link_prob() - 0.01).abs() < 1e-15);
        assert!(p.is_critical());
        let p = IntersectionParams::new(100, 4.0, 1.0).unwrap();
        assert!(!p.is_critical());
        assert!(IntersectionParams::new(100, 0.001, 1.0).is_err()); // k = 0
        assert!(IntersectionParams::new(2, 1.0, 3.0).is_err()); // p > 1
    }

    #[test]
    fn gamma_zero_gives_singletons() {
        let params = IntersectionParams::new(50, 1.0, 0.0).unwrap();
        let mut s = derive_stream(1, 0);
        let t = explore(&params, &mut s);
        assert_eq!(t.profile.sizes, vec![1; 50]);
        assert_eq!(t.attributes_discovered, 0);
    }

    #[test]
    fn single_vertex() {
        let params = IntersectionParams::new(1, 2.0, 0.5).unwrap();
        let mut s = derive_stream(2, 0);
        let t = explore(&params, &mut s);
        assert_eq!(t.profile.sizes, vec![1]);
    }

    #[test]
    fn certain_links_connect_everything() {
        // gamma = n makes p = 1: every vertex holds every attribute
        let params = IntersectionParams::new(20, 1.0, 20.0).unwrap();
        let mut s = derive_stream(7, 0);
        let t = explore(&params, &mut s);
        assert_eq!(t.profile.sizes, vec![20]);
        assert_eq!(t.attributes_discovered, params.k());
    }

    #[test]
    fn explore_invariants_per_trial() {
        let params = IntersectionParams::new(200, 1.0, 1.0).unwrap();
        for i in 0..50 {
            let mut s = derive_stream(3, i);
            let t = explore(&params, &mut s);
            assert_eq!(t.profile.sizes.iter().sum::<u64>(), 200);
            assert!(t.attributes_discovered <= params.k());
            assert_eq!(t.profile.excursion_lengths(), t.profile.sizes);
        }
    }

    #[test]
    fn mean_offspring_trivial_cases() {
        let params = IntersectionParams::new(100, 1.0, 0.0).unwrap();
        let mut s = derive_stream(4, 0);
        assert_eq!(mean_offspring_check(&params, 100, &mut s), 0.0);
    }

    #[test]
    fn projection_from_shared_attribute() {
        // one attribute linked to all vertices -> complete projection
        let links: Vec<(u32, u32)> = (0..5).map(|v| (v, 0)).collect();
        let inst = BipartiteInstance::new(5, 2, links).unwrap();
        assert_eq!(inst.projection.len(), 10);
        // empty incidence -> empty projection
        let inst = BipartiteInstance::new(5, 2, vec![]).unwrap();
        assert!(inst.projection.is_empty());
    }

    #[test]
    fn materialized_projection_recount_is_exact() {
        let params = IntersectionParams::new(50, 1.0, 1.0).unwrap();
        let mut s = derive_stream(5, 0);
        for _ in 0..20 {
            let inst = materialize(&params, &mut s).unwrap();
            assert_eq!(inst.projection, inst.recount_projection());
        }
    }

    #[test]
    fn materialize_respects_cap() {
        let params = IntersectionParams::new(ORACLE_CAP + 1, 1.0, 1.0).unwrap();
        let mut s = derive_stream(6, 0);
        assert!(materialize(&params, &mut s).is_err());
    }
}
