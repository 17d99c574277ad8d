//! Quantum random graph on n circles of length theta = lambda * beta:
//! rate-1 Poisson holes cut each circle into intervals, pairwise rate
//! 1/(lambda n) Poisson processes link intervals that share a jump time.
//! Includes the critical-curve solver, the reduced one-interval-per-circle
//! exploration used for tail measurement, and the full interval-by-interval
//! exploration replayed on materialized instances.

use std::collections::BTreeSet;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::{ComponentProfile, WalkRecorder};
use crate::rng::{derive_stream, sample_binomial, sample_cut_gamma, sample_poisson_process,
    CutGammaParams, RngStream};

pub const ORACLE_CAP: usize = 128;

/// Geometric tolerance for wrap arithmetic checks.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantumParams {
    n: usize,
    beta: f64,
    lambda: f64,
}

impl QuantumParams {
    pub fn new(n: usize, beta: f64, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("quantum: n must be positive".into()));
        }
        if !beta.is_finite() || beta <= 0.0 {
            return Err(Error::InvalidParameter("quantum: beta must be positive".into()));
        }
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(Error::InvalidParameter("quantum: lambda must be positive".into()));
        }
        Ok(QuantumParams { n, beta, lambda })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Circle length theta = lambda * beta.
    pub fn theta(&self) -> f64 {
        self.lambda * self.beta
    }
}

/// `F(theta) = 2 (1 - e^{-theta}) - theta e^{-theta}`, evaluated stably.
/// Equals the cut-gamma mean `2 - (theta + 2) e^{-theta}`.
pub fn curve_f(theta: f64) -> f64 {
    2.0 * (-(-theta).exp_m1()) - theta * (-theta).exp()
}

/// `F(beta, lambda) - 1 = F(lambda*beta)/lambda - 1`; zero on the critical curve.
pub fn critical_residual(beta: f64, lambda: f64) -> Result<f64> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok(curve_f(lambda * beta) / lambda - 1.0)
}

/// Roots in lambda of F(beta, lambda) = 1 at fixed beta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub beta: f64,
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
}

const LAMBDA_LO: f64 = 1e-9;
const LAMBDA_HI: f64 = 1e9;

/// Solves F(beta, lambda) = 1 for lambda by bisecting each monotone branch
/// of the (unimodal in lambda) curve. Zero roots is a valid answer.
pub fn solve_critical_lambda(beta: f64) -> Result<CriticalPoint> {
    if !beta.is_finite() || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let residual = |lambda: f64| curve_f(lambda * beta) / lambda - 1.0;

    // locate the maximum on a log grid, then bisect the two branches
    let grid_points = 400;
    let ratio = (LAMBDA_HI / LAMBDA_LO).ln() / (grid_points as f64 - 1.0);
    let grid: Vec<f64> =
        (0..grid_points).map(|i| LAMBDA_LO * (ratio * i as f64).exp()).collect();
    let values: Vec<f64> = grid.iter().map(|&l| residual(l)).collect();
    let argmax = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap();

    let mut lambdas = Vec::new();
    let mut residuals = Vec::new();
    let mut push_root = |lo: f64, hi: f64| {
        if let Some(root) = bisect_root(&residual, lo, hi) {
            let r = residual(root);
            if r.abs() < 1e-12 {
                lambdas.push(root);
                residuals.push(r);
            }
        }
    };
    // ascending branch: residual crosses upward left of the max
    if argmax > 0 && values[0] < 0.0 && values[argmax] >= 0.0 {
        push_root(grid[0], grid[argmax]);
    }
    // descending branch: residual crosses downward right of the max
    if argmax < grid_points - 1 && values[argmax] >= 0.0 && values[grid_points - 1] < 0.0 {
        push_root(grid[argmax], grid[grid_points - 1]);
    }
    let mut pairs: Vec<(f64, f64)> = lambdas.into_iter().zip(residuals).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (lambdas, residuals) = pairs.into_iter().unzip();
    Ok(CriticalPoint { beta, lambdas, residuals })
}

fn bisect_root(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 || (hi - lo) < lo * 1e-16 {
            return Some(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Reduced exploration: one interval per circle, the rest of each visited
/// circle voided. At step t the walk draws the interval mass `J ~ cut-gamma`
/// and `eta ~ Bin(U - [Y = 0], 1 - e^{-J/(lambda n)})` newly linked circles.
pub fn reduced_explore(params: &QuantumParams, stream: &mut RngStream) -> ComponentProfile {
    let n = params.n as u64;
    let lambda_n = params.lambda * params.n as f64;
    let cut = CutGammaParams::new(params.theta()).expect("theta > 0");
    let mut active: u64 = 0;
    let mut rec = WalkRecorder::new();
    for t in 1..=n {
        let j = sample_cut_gamma(&cut, stream);
        let succ = -(-j / lambda_n).exp_m1();
        let unseen = n - (t - 1) - active;
        let count = if active == 0 { unseen - 1 } else { unseen };
        let eta = sample_binomial(count, succ, stream).expect("probability in [0,1]");
        active = if active == 0 { eta } else { active + eta - 1 };
        rec.record(t, active);
    }
    debug_assert_eq!(active, 0);
    rec.into_unit_profile(n)
}

/// A half-open arc [start, start + len) on a circle of length theta,
/// wrapping past theta when flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub circle: u32,
    pub start: f64,
    pub len: f64,
    pub wraps: bool,
}

impl Arc {
    #[inline]
    pub fn contains(&self, x: f64, theta: f64) -> bool {
        let rel = (x - self.start).rem_euclid(theta);
        rel < self.len
    }
}

/// A fully materialized instance: hole processes, the induced interval
/// partition, all pairwise link processes and a checkpointed stream for the
/// replay's own point selections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumInstance {
    pub n: usize,
    pub theta: f64,
    pub lambda: f64,
    pub holes: Vec<Vec<f64>>,
    pub intervals: Vec<Arc>,
    /// Prefix offsets into `intervals`, length n + 1.
    pub circle_first: Vec<usize>,
    /// Link times per unordered pair in triangular order.
    pub links: Vec<Vec<f64>>,
    explore_token: String,
}

#[inline]
fn pair_index(u: usize, v: usize, n: usize) -> usize {
    debug_assert!(u < v && v < n);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}

fn intervals_of_circle(circle: u32, holes: &[f64], theta: f64) -> Vec<Arc> {
    if holes.is_empty() {
        return vec![Arc { circle, start: 0.0, len: theta, wraps: false }];
    }
    let m = holes.len();
    let mut arcs = Vec::with_capacity(m);
    for j in 0..m {
        let start = holes[j];
        let len = if j + 1 < m { holes[j + 1] - start } else { theta - start + holes[0] };
        arcs.push(Arc { circle, start, len, wraps: start + len > theta });
    }
    arcs
}

impl QuantumInstance {
    pub fn k_of(&self, circle: usize) -> usize {
        self.circle_first[circle + 1] - self.circle_first[circle]
    }

    pub fn total_intervals(&self) -> usize {
        self.intervals.len()
    }

    pub fn link_times(&self, u: usize, v: usize) -> &[f64] {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        &self.links[pair_index(a, b, self.n)]
    }

    /// Global id of the interval containing position x on the circle.
    pub fn locate(&self, circle: usize, x: f64) -> usize {
        let lo = self.circle_first[circle];
        let hi = self.circle_first[circle + 1];
        let holes = &self.holes[circle];
        if holes.is_empty() {
            return lo;
        }
        // last hole position <= x, else the wrapping interval
        let idx = holes.partition_point(|&h| h <= x);
        if idx == 0 {
            hi - 1
        } else {
            lo + idx - 1
        }
    }

    /// Edges of the interval graph: one per link time lying inside an
    /// interval on both circles.
    pub fn interval_graph_edges(&self) -> Vec<(u32, u32)> {
        let mut edges = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                for &r in self.link_times(u, v) {
                    let iu = self.locate(u, r);
                    let iv = self.locate(v, r);
                    edges.push((iu as u32, iv as u32));
                }
            }
        }
        edges
    }

    /// Internal consistency: sorted holes in range, intervals partitioning
    /// each circle to within the wrap tolerance, link times in range.
    pub fn validate(&self) -> Result<()> {
        if self.holes.len() != self.n || self.circle_first.len() != self.n + 1 {
            return Err(Error::InvalidInstance("circle tables have wrong length".into()));
        }
        if self.links.len() != self.n * (self.n - 1) / 2 {
            return Err(Error::InvalidInstance("pair table has wrong length".into()));
        }
        for (c, holes) in self.holes.iter().enumerate() {
            if holes.windows(2).any(|w| w[0] > w[1]) {
                return Err(Error::InvalidInstance(format!("holes on circle {c} unsorted")));
            }
            if holes.iter().any(|&h| !(0.0..self.theta).contains(&h)) {
                return Err(Error::InvalidInstance(format!("hole out of range on circle {c}")));
            }
            let arcs = &self.intervals[self.circle_first[c]..self.circle_first[c + 1]];
            let expected = if holes.is_empty() { 1 } else { holes.len() };
            if arcs.len() != expected {
                return Err(Error::InvalidInstance(format!(
                    "circle {c} has {} intervals, expected {expected}",
                    arcs.len()
                )));
            }
            let total: f64 = arcs.iter().map(|a| a.len).sum();
            if (total - self.theta).abs() > GEOM_EPS {
                return Err(Error::InvalidInstance(format!(
                    "interval lengths on circle {c} sum to {total}, expected {}",
                    self.theta
                )));
            }
        }
        for times in &self.links {
            if times.iter().any(|&r| !(0.0..self.theta).contains(&r)) {
                return Err(Error::InvalidInstance("link time out of range".into()));
            }
        }
        Ok(())
    }
}

/// Materializes holes, intervals and pairwise link processes for n circles.
pub fn materialize_quantum(
    params: &QuantumParams,
    stream: &mut RngStream,
) -> Result<QuantumInstance> {
    if params.n > ORACLE_CAP {
        return Err(Error::SizeCap { requested: params.n, cap: ORACLE_CAP });
    }
    let n = params.n;
    let theta = params.theta();
    let link_rate = 1.0 / (params.lambda * n as f64);

    let mut holes = Vec::with_capacity(n);
    let mut intervals = Vec::new();
    let mut circle_first = Vec::with_capacity(n + 1);
    for c in 0..n {
        circle_first.push(intervals.len());
        let h = sample_poisson_process(1.0, theta, stream)?;
        intervals.extend(intervals_of_circle(c as u32, &h, theta));
        holes.push(h);
    }
    circle_first.push(intervals.len());

    let mut links = Vec::with_capacity(n * (n - 1) / 2);
    for _u in 0..n {
        for _v in (_u + 1)..n {
            links.push(sample_poisson_process(link_rate, theta, stream)?);
        }
    }

    let explore_token =
        derive_stream(stream.next_u64(), stream.next_u64()).state_token();
    let instance = QuantumInstance {
        n,
        theta,
        lambda: params.lambda,
        holes,
        intervals,
        circle_first,
        links,
        explore_token,
    };
    instance.validate()?;
    Ok(instance)
}

/// Full exploration replayed on a materialized instance: intervals are
/// revealed one per step, active points are consumed by interval with their
/// registration order, links into explored intervals are erased, and
/// co-located active points are absorbed as surplus. The component multiset
/// equals union-find on the interval graph.
pub fn full_explore(instance: &QuantumInstance) -> Result<ComponentProfile> {
    instance.validate()?;
    let n = instance.n;
    let total = instance.total_intervals();
    let mut stream = RngStream::from_state_token(&instance.explore_token)?;

    let mut explored = vec![false; total];
    let mut explored_per_circle = vec![0usize; n];
    // active points ordered by (circle, registration); one list per interval
    let mut active: BTreeSet<(u32, u64)> = BTreeSet::new();
    let mut interval_of: std::collections::HashMap<u64, usize> = std::collections::HashMap::new();
    let mut per_interval: Vec<Vec<u64>> = vec![Vec::new(); total];
    let mut next_reg: u64 = 0;
    let mut rec = WalkRecorder::new();
    let mut comp_sizes: Vec<u64> = Vec::new();
    let mut cur: u64 = 0;
    let mut explored_count = 0usize;
    let mut t: u64 = 0;

    while explored_count < total {
        t += 1;
        if active.is_empty() {
            // seed: a uniform point on a fully neutral circle when one exists,
            // else on the neutral part of the lowest-index unfinished circle.
            // Either way the point's interval is length-biased among the
            // unexplored intervals of that circle.
            let fresh = (0..n).find(|&c| explored_per_circle[c] == 0);
            let seed_circle = fresh.unwrap_or_else(|| {
                (0..n)
                    .find(|&c| explored_per_circle[c] < instance.k_of(c))
                    .expect("unexplored interval exists")
            });
            let lo = instance.circle_first[seed_circle];
            let hi = instance.circle_first[seed_circle + 1];
            let neutral: f64 =
                (lo..hi).filter(|&i| !explored[i]).map(|i| instance.intervals[i].len).sum();
            let mut target = stream.next_f64() * neutral;
            let mut chosen = None;
            for (i, arc) in instance.intervals[lo..hi]
                .iter()
                .enumerate()
                .map(|(off, arc)| (lo + off, arc))
                .filter(|&(i, _)| !explored[i])
            {
                if target < arc.len {
                    chosen = Some(i);
                    break;
                }
                target -= arc.len;
            }
            let interval_id = chosen
                .unwrap_or_else(|| (lo..hi).rev().find(|&i| !explored[i]).unwrap());
            let reg = next_reg;
            next_reg += 1;
            active.insert((seed_circle as u32, reg));
            interval_of.insert(reg, interval_id);
            per_interval[interval_id].push(reg);
        }
        let &(_, reg) = active.iter().next().unwrap();
        let interval_id = interval_of[&reg];
        rec_step(instance, &mut explored, &mut explored_per_circle, &mut active, &mut interval_of,
            &mut per_interval, &mut next_reg, interval_id);
        explored_count += 1;
        cur += 1;
        let y = active.len() as u64;
        rec.record(t, y);
        if y == 0 {
            comp_sizes.push(cur);
            cur = 0;
        }
    }

    debug_assert_eq!(comp_sizes.iter().sum::<u64>(), total as u64);
    Ok(ComponentProfile {
        sizes: comp_sizes,
        excursion_bounds: rec.bounds,
        max_active: rec.max_active,
        steps: t,
    })
}

/// Explores one interval: absorbs its active points, samples its links and
/// registers fresh active points, erasing links into explored intervals.
#[allow(clippy::too_many_arguments)]
fn rec_step(
    instance: &QuantumInstance,
    explored: &mut [bool],
    explored_per_circle: &mut [usize],
    active: &mut BTreeSet<(u32, u64)>,
    interval_of: &mut std::collections::HashMap<u64, usize>,
    per_interval: &mut [Vec<u64>],
    next_reg: &mut u64,
    interval_id: usize,
) {
    let arc = instance.intervals[interval_id];
    let circle = arc.circle as usize;
    explored[interval_id] = true;
    explored_per_circle[circle] += 1;

    // absorb every active point inside this interval (surplus beyond the first)
    for reg in per_interval[interval_id].drain(..) {
        active.remove(&(arc.circle, reg));
        interval_of.remove(&reg);
    }

    for other in 0..instance.n {
        if other == circle {
            continue;
        }
        for &r in instance.link_times(circle, other) {
            if !arc.contains(r, instance.theta) {
                continue;
            }
            let target = instance.locate(other, r);
            if explored[target] {
                continue; // link into an explored interval is erased
            }
            let reg = *next_reg;
            *next_reg += 1;
            active.insert((other as u32, reg));
            interval_of.insert(reg, target);
            per_interval[target].push(reg);
        }
    }
}
