//! Percolation on the configuration model: stub-level exploration, uniform
//! pairing of labelled half-edges, simplicity testing and deterministic
//! replay against realized pairings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{ComponentProfile, WalkRecorder};
use crate::rng::RngStream;

/// Parameters of percolation on a random d-regular multigraph with
/// p = (1 + lambda n^{-1/3}) / (d - 1), or an explicit override.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegParams {
    n: usize,
    d: usize,
    lambda: f64,
    p_override: Option<f64>,
}

impl RegParams {
    pub fn new(n: usize, d: usize, lambda: f64, p_override: Option<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("regular: n must be positive".into()));
        }
        if d < 3 {
            return Err(Error::InvalidParameter(format!("regular: d must be >= 3, got {d}")));
        }
        if n.checked_mul(d).is_none() || !(n * d).is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "regular: d*n must be even, got d={d}, n={n}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::InvalidParameter("regular: lambda must be finite".into()));
        }
        let params = RegParams { n, d, lambda, p_override };
        let p = params.percolation_prob();
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "regular: percolation probability {p} outside [0,1]"
            )));
        }
        Ok(params)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn percolation_prob(&self) -> f64 {
        match self.p_override {
            Some(p) => p,
            None => {
                let n = self.n as f64;
                (1.0 + self.lambda * n.powf(-1.0 / 3.0)) / (self.d as f64 - 1.0)
            }
        }
    }
}

const UNSEEN: u8 = 0;
const ACTIVE: u8 = 1;
const EXPLORED: u8 = 2;

/// Active-stub set with O(1) updates and amortized-cheap minimum queries.
struct ActiveSet {
    words: Vec<u64>,
    hint: usize,
}

impl ActiveSet {
    fn new(bits: usize) -> Self {
        ActiveSet { words: vec![0; bits.div_ceil(64)], hint: 0 }
    }

    #[inline]
    fn insert(&mut self, i: u32) {
        let w = (i / 64) as usize;
        self.words[w] |= 1u64 << (i % 64);
        if w < self.hint {
            self.hint = w;
        }
    }

    #[inline]
    fn remove(&mut self, i: u32) {
        self.words[(i / 64) as usize] &= !(1u64 << (i % 64));
    }

    /// Lowest-indexed active stub; caller guarantees nonempty.
    #[inline]
    fn min(&mut self) -> u32 {
        let mut w = self.hint;
        while self.words[w] == 0 {
            w += 1;
        }
        self.hint = w;
        (w * 64) as u32 + self.words[w].trailing_zeros()
    }
}

/// Supplies pairing partners and retention marks to the exploration core.
trait StubSource {
    /// Reveals the partner of stub `a`; both stubs leave the unexplored pool.
    fn partner(&mut self, a: u32) -> u32;
    /// Whether the revealed edge is kept by the percolation.
    fn retained(&mut self) -> bool;
}

/// On-the-fly uniform pairing with Bernoulli(p) retention.
struct RandomSource<'a> {
    pool: Vec<u32>,
    pos: Vec<u32>,
    p: f64,
    stream: &'a mut RngStream,
}

impl<'a> RandomSource<'a> {
    fn new(stubs: usize, p: f64, stream: &'a mut RngStream) -> Self {
        RandomSource {
            pool: (0..stubs as u32).collect(),
            pos: (0..stubs as u32).collect(),
            p,
            stream,
        }
    }

    #[inline]
    fn remove(&mut self, stub: u32) {
        let at = self.pos[stub as usize] as usize;
        let last = self.pool.pop().expect("pool nonempty");
        if last != stub {
            self.pool[at] = last;
            self.pos[last as usize] = at as u32;
        }
    }
}

impl StubSource for RandomSource<'_> {
    #[inline]
    fn partner(&mut self, a: u32) -> u32 {
        self.remove(a);
        let h = self.pool[self.stream.index(self.pool.len())];
        self.remove(h);
        h
    }

    #[inline]
    fn retained(&mut self) -> bool {
        self.stream.bernoulli(self.p)
    }
}

/// Replay source reading a fixed pairing and per-pair retention marks.
struct FixedSource<'a> {
    partner_of: Vec<u32>,
    pair_index: Vec<u32>,
    retention: &'a [bool],
    last_pair: u32,
}

impl StubSource for FixedSource<'_> {
    #[inline]
    fn partner(&mut self, a: u32) -> u32 {
        self.last_pair = self.pair_index[a as usize];
        self.partner_of[a as usize]
    }

    #[inline]
    fn retained(&mut self) -> bool {
        self.retention[self.last_pair as usize]
    }
}

/// Shared stub-level exploration: one pairing per step, dn/2 steps total.
/// Component sizes are counted in vertices; vertices whose stubs were all
/// consumed by unretained pairings never seed an excursion and are appended
/// as singletons.
fn run_stub_exploration(
    n: usize,
    d: usize,
    ordering: &[u32],
    source: &mut impl StubSource,
) -> ComponentProfile {
    let stubs = n * d;
    let steps = (stubs / 2) as u64;
    let mut status = vec![UNSEEN; stubs];
    let mut unseen_left = vec![d as u32; n];
    let mut joined = vec![false; n];
    let mut active = ActiveSet::new(stubs);
    let mut y: u64 = 0;
    let mut rec = WalkRecorder::new();
    let mut comp_sizes: Vec<u64> = Vec::new();
    let mut cur: u64 = 0;
    let mut seed_ptr = 0usize;

    for t in 1..=steps {
        if y == 0 {
            while unseen_left[ordering[seed_ptr] as usize] == 0 {
                seed_ptr += 1;
            }
            let v = ordering[seed_ptr] as usize;
            joined[v] = true;
            cur += 1;
            for s in (v * d) as u32..((v + 1) * d) as u32 {
                if status[s as usize] == UNSEEN {
                    status[s as usize] = ACTIVE;
                    active.insert(s);
                    y += 1;
                }
            }
            unseen_left[v] = 0;
        }
        let a = active.min();
        status[a as usize] = EXPLORED;
        active.remove(a);
        y -= 1;

        let h = source.partner(a);
        match status[h as usize] {
            ACTIVE => {
                // surplus edge inside the current component
                status[h as usize] = EXPLORED;
                active.remove(h);
                y -= 1;
            }
            UNSEEN => {
                status[h as usize] = EXPLORED;
                let w = (h as usize) / d;
                unseen_left[w] -= 1;
                if source.retained() {
                    debug_assert!(!joined[w]);
                    joined[w] = true;
                    cur += 1;
                    for s in (w * d) as u32..((w + 1) * d) as u32 {
                        if status[s as usize] == UNSEEN {
                            status[s as usize] = ACTIVE;
                            active.insert(s);
                            y += 1;
                        }
                    }
                    unseen_left[w] = 0;
                }
            }
            _ => unreachable!("partner of an unexplored stub must be unexplored"),
        }
        rec.record(t, y);
        if y == 0 {
            comp_sizes.push(cur);
            cur = 0;
        }
    }
    debug_assert_eq!(y, 0);

    // vertices untouched by any retained edge are isolated components
    comp_sizes.extend(joined.iter().filter(|&&j| !j).map(|_| 1));
    debug_assert_eq!(comp_sizes.iter().sum::<u64>(), n as u64);
    ComponentProfile {
        sizes: comp_sizes,
        excursion_bounds: rec.bounds,
        max_active: rec.max_active,
        steps,
    }
}

/// Explores G'(n, d, p) with on-the-fly pairing: at each step the lowest
/// active stub is paired with a uniform unexplored stub and the edge is
/// retained independently with probability p.
pub fn explore(params: &RegParams, stream: &mut RngStream) -> ComponentProfile {
    let ordering: Vec<u32> = (0..params.n as u32).collect();
    let mut source = RandomSource::new(params.n * params.d, params.percolation_prob(), stream);
    run_stub_exploration(params.n, params.d, &ordering, &mut source)
}

/// Per-excursion half-edge lengths: pairing steps beyond the seeding step,
/// i.e. the time the walk spends strictly above zero inside each excursion.
pub fn halfedge_excursion_lengths(profile: &ComponentProfile) -> Vec<u64> {
    profile.excursion_bounds.windows(2).map(|w| w[1] - w[0] - 1).collect()
}

/// Checks `halfedge excursion <= (d-1) * vertex count` for every seeded
/// excursion of a trial.
pub fn excursion_bound_holds(profile: &ComponentProfile, d: usize) -> bool {
    let lens = halfedge_excursion_lengths(profile);
    lens.iter()
        .zip(profile.sizes.iter())
        .all(|(&len, &size)| len <= (d as u64 - 1) * size)
}

/// A realized configuration-model pairing on d*n labelled stubs.
/// Stub `s` belongs to vertex `s / d`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pairing {
    pub n: usize,
    pub d: usize,
    pub pairs: Vec<(u32, u32)>,
}

impl Pairing {
    pub fn new(n: usize, d: usize, pairs: Vec<(u32, u32)>) -> Result<Self> {
        let stubs = n * d;
        if pairs.len() * 2 != stubs {
            return Err(Error::InvalidInstance(format!(
                "pairing has {} pairs, expected {}",
                pairs.len(),
                stubs / 2
            )));
        }
        let mut seen = vec![false; stubs];
        for &(a, b) in &pairs {
            for s in [a, b] {
                if s as usize >= stubs {
                    return Err(Error::InvalidInstance(format!("stub {s} out of range")));
                }
                if seen[s as usize] {
                    return Err(Error::InvalidInstance(format!("stub {s} paired twice")));
                }
                seen[s as usize] = true;
            }
            if a == b {
                return Err(Error::InvalidInstance(format!("stub {a} paired with itself")));
            }
        }
        Ok(Pairing { n, d, pairs })
    }

    /// Multigraph edges (vertex pairs; self-loops and multi-edges possible).
    pub fn multigraph_edges(&self) -> Vec<(u32, u32)> {
        self.pairs
            .iter()
            .map(|&(a, b)| ((a as usize / self.d) as u32, (b as usize / self.d) as u32))
            .collect()
    }

    /// Retained edges of the percolated multigraph.
    pub fn percolated_edges(&self, retention: &[bool]) -> Vec<(u32, u32)> {
        self.multigraph_edges()
            .into_iter()
            .zip(retention.iter())
            .filter_map(|(e, &keep)| keep.then_some(e))
            .collect()
    }
}

/// Uniform perfect matching on d*n labelled stubs (Fisher-Yates shuffle,
/// then adjacent pairs).
pub fn pair_full(n: usize, d: usize, stream: &mut RngStream) -> Result<Pairing> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("pair_full: n and d must be positive".into()));
    }
    let stubs = n.checked_mul(d).filter(|m| m % 2 == 0).ok_or_else(|| {
        Error::InvalidParameter(format!("pair_full: d*n must be even, got d={d}, n={n}"))
    })?;
    let mut arr: Vec<u32> = (0..stubs as u32).collect();
    for i in (1..stubs).rev() {
        let j = stream.index(i + 1);
        arr.swap(i, j);
    }
    let pairs = arr.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    Pairing::new(n, d, pairs)
}

/// True iff the multigraph has no self-loops and no repeated edges.
pub fn is_simple(pairing: &Pairing) -> bool {
    let mut seen = std::collections::HashSet::new();
    for (u, v) in pairing.multigraph_edges() {
        if u == v {
            return false;
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return false;
        }
    }
    true
}

/// Draws one retention mark per matched pair.
pub fn draw_retention(pairing: &Pairing, p: f64, stream: &mut RngStream) -> Vec<bool> {
    (0..pairing.pairs.len()).map(|_| stream.bernoulli(p)).collect()
}

/// Deterministic replay of the stub exploration on a realized pairing with
/// given retention marks, seeding components along `ordering`.
pub fn explore_on_instance(
    pairing: &Pairing,
    retention: &[bool],
    ordering: &[u32],
) -> Result<ComponentProfile> {
    let stubs = pairing.n * pairing.d;
    if retention.len() != pairing.pairs.len() {
        return Err(Error::InvalidParameter(format!(
            "retention has {} marks, expected {}",
            retention.len(),
            pairing.pairs.len()
        )));
    }
    if ordering.len() != pairing.n {
        return Err(Error::InvalidParameter("ordering must list every vertex".into()));
    }
    let mut check = vec![false; pairing.n];
    for &v in ordering {
        if v as usize >= pairing.n || check[v as usize] {
            return Err(Error::InvalidParameter("ordering must be a permutation".into()));
        }
        check[v as usize] = true;
    }
    let mut partner_of = vec![0u32; stubs];
    let mut pair_index = vec![0u32; stubs];
    for (i, &(a, b)) in pairing.pairs.iter().enumerate() {
        partner_of[a as usize] = b;
        partner_of[b as usize] = a;
        pair_index[a as usize] = i as u32;
        pair_index[b as usize] = i as u32;
    }
    let mut source = FixedSource { partner_of, pair_index, retention, last_pair: 0 };
    Ok(run_stub_exploration(pairing.n, pairing.d, ordering, &mut source))
}

/// Frequency of simple multigraphs over `trials` uniform pairings, one
/// derived stream per trial.
pub fn simple_frequency(n: usize, d: usize, trials: u64, master_seed: u64) -> Result<(u64, u64)> {
    if trials == 0 {
        return Err(Error::InvalidParameter("simplicity check needs trials >= 1".into()));
    }
    let mut hits = 0;
    for i in 0..trials {
        let mut stream = crate::rng::derive_stream(master_seed, i);
        if is_simple(&pair_full(n, d, &mut stream)?) {
            hits += 1;
        }
    }
    Ok((hits, trials))
}
