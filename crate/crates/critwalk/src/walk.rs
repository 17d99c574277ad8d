//! Lattice random-walk estimators: stay-positive survival probabilities,
//! ballot-type endpoint-conditioned probabilities, excursion decomposition
//! and the binomial Chernoff bound evaluator.

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{sample_binomial, RngStream};
use crate::stats::wilson_interval;

/// Integer-valued step laws used by the exploration heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum IncrementLaw {
    /// Poi(1) - 1.
    PoissonMinusOne,
    /// Bin(count, prob) - 1.
    BinomialMinusOne { count: u64, prob: f64 },
    /// (d-1) * Bernoulli(prob) - 1.
    RegularStep { d: u32, prob: f64 },
    /// d-2 with probability 1/(d-1), else -1; mean zero exactly.
    CutWalk { d: u32 },
    /// +1 or -1 with equal probability.
    Rademacher,
}

impl IncrementLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            IncrementLaw::BinomialMinusOne { prob, .. } | IncrementLaw::RegularStep { prob, .. } => {
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::InvalidParameter(format!(
                        "step probability must lie in [0,1], got {prob}"
                    )));
                }
            }
            IncrementLaw::CutWalk { d }
                if d < 2 => {
                    return Err(Error::InvalidParameter("cut walk needs d >= 2".into()));
                }
            _ => {}
        }
        if let IncrementLaw::RegularStep { d, .. } = *self {
            if d < 2 {
                return Err(Error::InvalidParameter("regular step needs d >= 2".into()));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn sample(&self, stream: &mut RngStream) -> i64 {
        match *self {
            IncrementLaw::PoissonMinusOne => {
                let poi = Poisson::new(1.0).unwrap();
                poi.sample(stream) as i64 - 1
            }
            IncrementLaw::BinomialMinusOne { count, prob } => {
                sample_binomial(count, prob, stream).expect("validated") as i64 - 1
            }
            IncrementLaw::RegularStep { d, prob } => {
                if stream.bernoulli(prob) {
                    d as i64 - 2
                } else {
                    -1
                }
            }
            IncrementLaw::CutWalk { d } => {
                if stream.next_f64() < 1.0 / (d as f64 - 1.0) {
                    d as i64 - 2
                } else {
                    -1
                }
            }
            IncrementLaw::Rademacher => {
                if stream.bernoulli(0.5) {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Whether `S_n = j` is structurally reachable with positive probability.
    pub fn ballot_reachable(&self, n: u64, j: i64) -> bool {
        match *self {
            IncrementLaw::PoissonMinusOne => j >= -(n as i64),
            IncrementLaw::BinomialMinusOne { count, prob } => {
                if prob <= 0.0 || count == 0 {
                    return j == -(n as i64);
                }
                if prob >= 1.0 {
                    return j == n as i64 * (count as i64 - 1);
                }
                j >= -(n as i64) && j <= n as i64 * (count as i64 - 1)
            }
            // steps in {d-2, -1}: S_n = x(d-1) - n for x successes
            IncrementLaw::RegularStep { d, .. } | IncrementLaw::CutWalk { d } => {
                let span = d as i64 - 1;
                let shifted = j + n as i64;
                shifted >= 0 && shifted % span == 0 && shifted / span <= n as i64
            }
            IncrementLaw::Rademacher => j.unsigned_abs() <= n && (j + n as i64) % 2 == 0,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            IncrementLaw::PoissonMinusOne => "poisson-minus-one".into(),
            IncrementLaw::BinomialMinusOne { count, prob } => {
                format!("binomial-minus-one(n={count},p={prob})")
            }
            IncrementLaw::RegularStep { d, prob } => format!("regular-step(d={d},p={prob})"),
            IncrementLaw::CutWalk { d } => format!("cut-walk(d={d})"),
            IncrementLaw::Rademacher => "rademacher".into(),
        }
    }
}

/// A Monte Carlo probability estimate with its Wilson interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkEstimate {
    pub hits: u64,
    pub trials: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Set when the target endpoint is structurally unreachable.
    pub unreachable: bool,
}

fn estimate(hits: u64, trials: u64, unreachable: bool) -> WalkEstimate {
    let (ci_lo, ci_hi) = wilson_interval(hits, trials, 1.96);
    WalkEstimate { hits, trials, phat: hits as f64 / trials as f64, ci_lo, ci_hi, unreachable }
}

/// Estimates `P(1 + sum_{k<=t} X_k > 0 for all t <= horizon)`: the walk
/// starts at one and must stay strictly positive.
pub fn stay_positive_estimate(
    law: &IncrementLaw,
    horizon: u64,
    trials: u64,
    stream: &mut RngStream,
) -> Result<WalkEstimate> {
    law.validate()?;
    if horizon < 1 || trials < 1 {
        return Err(Error::InvalidParameter("horizon and trials must be >= 1".into()));
    }
    let mut hits = 0u64;
    for _ in 0..trials {
        let mut s: i64 = 1;
        let mut alive = true;
        for _ in 0..horizon {
            s += law.sample(stream);
            if s <= 0 {
                alive = false;
                break;
            }
        }
        if alive {
            hits += 1;
        }
    }
    Ok(estimate(hits, trials, false))
}

/// Estimates the ballot probability `P(S_t > 0 for all t in [n], S_n = j)`
/// for the walk started at zero. Unreachable `j` yields zero with a flag.
pub fn ballot_estimate(
    law: &IncrementLaw,
    n: u64,
    j: i64,
    trials: u64,
    stream: &mut RngStream,
) -> Result<WalkEstimate> {
    law.validate()?;
    if n < 1 || trials < 1 {
        return Err(Error::InvalidParameter("n and trials must be >= 1".into()));
    }
    if !law.ballot_reachable(n, j) {
        return Ok(WalkEstimate {
            hits: 0,
            trials,
            phat: 0.0,
            ci_lo: 0.0,
            ci_hi: 0.0,
            unreachable: true,
        });
    }
    let mut hits = 0u64;
    for _ in 0..trials {
        if simulate_ballot(law, n, stream) == Some(j) {
            hits += 1;
        }
    }
    Ok(estimate(hits, trials, false))
}

/// Runs one strictly-positive walk from zero; returns the endpoint when the
/// walk survived all n steps.
fn simulate_ballot(law: &IncrementLaw, n: u64, stream: &mut RngStream) -> Option<i64> {
    let mut s: i64 = 0;
    for _ in 0..n {
        s += law.sample(stream);
        if s <= 0 {
            return None;
        }
    }
    Some(s)
}

/// Histogram of surviving endpoints over many trials: one pass serves every
/// target j as well as the total survival probability.
pub fn ballot_endpoint_histogram(
    law: &IncrementLaw,
    n: u64,
    trials: u64,
    stream: &mut RngStream,
) -> Result<std::collections::HashMap<i64, u64>> {
    law.validate()?;
    if n < 1 || trials < 1 {
        return Err(Error::InvalidParameter("n and trials must be >= 1".into()));
    }
    let mut hist = std::collections::HashMap::new();
    for _ in 0..trials {
        if let Some(j) = simulate_ballot(law, n, stream) {
            *hist.entry(j).or_insert(0u64) += 1;
        }
    }
    Ok(hist)
}

/// Upper bound `exp(-x^2 / (2 (N P + x/3)))` for `P(Bin(N, P) >= N P + x)`.
pub fn chernoff_bound(n: u64, p: f64, x: f64) -> f64 {
    assert!(n >= 1 && (0.0..=1.0).contains(&p) && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    (-x * x / (2.0 * (n as f64 * p + x / 3.0))).exp()
}

/// Excursion decomposition of a nonnegative walk path (values from step 1
/// on, an implicit zero start). Completed excursions end at each zero of the
/// path; a trailing positive stretch is reported as the open excursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExcursionSplit {
    pub completed: Vec<u64>,
    pub open: Option<u64>,
}

pub fn excursion_lengths(path: &[i64]) -> Result<ExcursionSplit> {
    if path.iter().any(|&y| y < 0) {
        return Err(Error::InvalidParameter("path must be nonnegative".into()));
    }
    let mut completed = Vec::new();
    let mut last_zero = 0u64;
    for (idx, &y) in path.iter().enumerate() {
        let t = idx as u64 + 1;
        if y == 0 {
            completed.push(t - last_zero);
            last_zero = t;
        }
    }
    let open = match path.len() as u64 - last_zero {
        0 => None,
        open_len => Some(open_len),
    };
    Ok(ExcursionSplit { completed, open })
}
