//! Trial orchestration, tail-probability estimation in both directions and
//! stretched-exponential exponent fitting. Per-trial streams are derived
//! from the master seed by trial index, so results are byte-identical for
//! any worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intersection::IntersectionParams;
use crate::profile::ComponentProfile;
use crate::quantum::QuantumParams;
use crate::regular::{halfedge_excursion_lengths, RegParams};
use crate::rng::derive_stream;
use crate::stats::wilson_interval;
use crate::er::ErParams;

/// Wilson interval z-score pinned for all emitted curves.
pub const WILSON_Z: f64 = 1.96;

/// Tagged union over the four model parameter sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum ModelSpec {
    Er(ErParams),
    Regular(RegParams),
    Intersection(IntersectionParams),
    Quantum(QuantumParams),
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        match self {
            ModelSpec::Er(p) => p.n(),
            ModelSpec::Regular(p) => p.n(),
            ModelSpec::Intersection(p) => p.n(),
            ModelSpec::Quantum(p) => p.n(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ModelSpec::Er(_) => "er",
            ModelSpec::Regular(_) => "regular",
            ModelSpec::Intersection(_) => "intersection",
            ModelSpec::Quantum(_) => "quantum",
        }
    }

    fn run_one(&self, trial: u64, master_seed: u64) -> TrialSummary {
        let mut stream = derive_stream(master_seed, trial);
        match self {
            ModelSpec::Er(p) => {
                TrialSummary::from_profile(trial, &crate::er::explore(p, &mut stream))
            }
            ModelSpec::Regular(p) => {
                let profile = crate::regular::explore(p, &mut stream);
                let mut s = TrialSummary::from_profile(trial, &profile);
                s.halfedge_excursion_max =
                    halfedge_excursion_lengths(&profile).into_iter().max();
                s
            }
            ModelSpec::Intersection(p) => {
                let t = crate::intersection::explore(p, &mut stream);
                let mut s = TrialSummary::from_profile(trial, &t.profile);
                s.attributes_discovered_total = Some(t.attributes_discovered);
                s
            }
            ModelSpec::Quantum(p) => {
                let profile = crate::quantum::reduced_explore(p, &mut stream);
                let mut s = TrialSummary::from_profile(trial, &profile);
                s.intervals_total = Some(profile.steps);
                s
            }
        }
    }
}

/// One CSV row of a run: base columns plus the model's extension column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub trial: u64,
    pub cmax: u64,
    pub n_components: u64,
    pub max_active: u64,
    pub steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub halfedge_excursion_max: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attributes_discovered_total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intervals_total: Option<u64>,
}

impl TrialSummary {
    pub fn from_profile(trial: u64, profile: &ComponentProfile) -> Self {
        TrialSummary {
            trial,
            cmax: profile.cmax(),
            n_components: profile.n_components() as u64,
            max_active: profile.max_active,
            steps: profile.steps,
            halfedge_excursion_max: None,
            attributes_discovered_total: None,
            intervals_total: None,
        }
    }
}

/// Runs `trials` independent trials; trial i consumes the derived stream of
/// index i. The output is ordered by trial index and does not depend on the
/// worker count.
pub fn run(
    spec: &ModelSpec,
    trials: u64,
    master_seed: u64,
    workers: usize,
) -> Result<Vec<TrialSummary>> {
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    if workers < 1 {
        return Err(Error::InvalidParameter("workers must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| spec.run_one(i, master_seed))
            .collect()
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailDirection {
    Lower,
    Upper,
}

impl std::fmt::Display for TailDirection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TailDirection::Lower => write!(f, "lower"),
            TailDirection::Upper => write!(f, "upper"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub a: f64,
    pub threshold: f64,
    pub trials: u64,
    pub hits: u64,
    pub phat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub direction: TailDirection,
    pub rows: Vec<TailRow>,
}

fn tail_curve(
    summaries: &[TrialSummary],
    n: usize,
    a_values: &[f64],
    direction: TailDirection,
) -> Result<TailCurve> {
    if summaries.is_empty() {
        return Err(Error::InvalidParameter("tail estimation needs summaries".into()));
    }
    if a_values.iter().any(|&a| !a.is_finite() || a <= 0.0) {
        return Err(Error::InvalidParameter("A values must be positive".into()));
    }
    let n23 = (n as f64).powf(2.0 / 3.0);
    let trials = summaries.len() as u64;
    let rows = a_values
        .iter()
        .map(|&a| {
            let threshold = match direction {
                TailDirection::Lower => n23 / a,
                TailDirection::Upper => a * n23,
            };
            let hits = summaries
                .iter()
                .filter(|s| match direction {
                    TailDirection::Lower => (s.cmax as f64) < threshold,
                    TailDirection::Upper => (s.cmax as f64) > threshold,
                })
                .count() as u64;
            let (ci_lo, ci_hi) = wilson_interval(hits, trials, WILSON_Z);
            TailRow { a, threshold, trials, hits, phat: hits as f64 / trials as f64, ci_lo, ci_hi }
        })
        .collect();
    Ok(TailCurve { direction, rows })
}

/// Per-A estimates of `P(cmax < n^{2/3} / A)` with strict real-valued
/// thresholds.
pub fn lower_tail(summaries: &[TrialSummary], n: usize, a_values: &[f64]) -> Result<TailCurve> {
    tail_curve(summaries, n, a_values, TailDirection::Lower)
}

/// Per-A estimates of `P(cmax > A n^{2/3})`.
pub fn upper_tail(summaries: &[TrialSummary], n: usize, a_values: &[f64]) -> Result<TailCurve> {
    tail_curve(summaries, n, a_values, TailDirection::Upper)
}

impl TailCurve {
    /// Combines two runs over disjoint trial ranges by adding counts; the
    /// A grids must match.
    pub fn merge(&self, other: &TailCurve) -> Result<TailCurve> {
        if self.direction != other.direction || self.rows.len() != other.rows.len() {
            return Err(Error::InvalidParameter("tail curves do not align".into()));
        }
        let rows = self
            .rows
            .iter()
            .zip(other.rows.iter())
            .map(|(a, b)| {
                if a.a != b.a {
                    return Err(Error::InvalidParameter("A grids differ".into()));
                }
                let trials = a.trials + b.trials;
                let hits = a.hits + b.hits;
                let (ci_lo, ci_hi) = wilson_interval(hits, trials, WILSON_Z);
                Ok(TailRow {
                    a: a.a,
                    threshold: a.threshold,
                    trials,
                    hits,
                    phat: hits as f64 / trials as f64,
                    ci_lo,
                    ci_hi,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TailCurve { direction: self.direction, rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub rows_used: usize,
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn usable_points(rows: &[TailRow]) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.phat > 0.0 && r.phat < 1.0)
        .map(|r| (r.a.ln(), (-r.phat.ln()).ln()))
        .collect()
}

const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 0x05ee_df17;

/// Least squares of `log(-log phat)` against `log A` over rows with phat
/// strictly inside (0, 1), with a parametric bootstrap of the per-row
/// binomial counts for the slope interval.
pub fn fit_stretch_exponent(curve: &TailCurve) -> Result<ExponentFit> {
    let points = usable_points(&curve.rows);
    if points.len() < 3 {
        return Err(Error::FitUnderdetermined { usable_rows: points.len() });
    }
    let (slope, intercept) = least_squares(&points);

    let usable_rows: Vec<&TailRow> =
        curve.rows.iter().filter(|r| r.phat > 0.0 && r.phat < 1.0).collect();
    let mut stream = derive_stream(BOOTSTRAP_SEED, 0);
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut pts = Vec::with_capacity(usable_rows.len());
        for row in &usable_rows {
            let hits = crate::rng::sample_binomial(row.trials, row.phat, &mut stream)
                .expect("phat in (0,1)");
            let phat = hits as f64 / row.trials as f64;
            if phat > 0.0 && phat < 1.0 {
                pts.push((row.a.ln(), (-phat.ln()).ln()));
            }
        }
        if pts.len() >= 2 {
            slopes.push(least_squares(&pts).0);
        }
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (ci_lo, ci_hi) = if slopes.is_empty() {
        (slope, slope)
    } else {
        let lo = slopes[(slopes.len() as f64 * 0.025) as usize];
        let hi = slopes[((slopes.len() as f64 * 0.975) as usize).min(slopes.len() - 1)];
        (lo, hi)
    };
    Ok(ExponentFit { slope, intercept, ci_lo, ci_hi, rows_used: points.len() })
}

/// Fixed column order of the summaries CSV for a model.
pub fn summary_columns(spec: &ModelSpec) -> Vec<&'static str> {
    let mut cols = vec!["trial", "cmax", "n_components", "max_active", "steps"];
    match spec {
        ModelSpec::Regular(_) => cols.push("halfedge_excursion_max"),
        ModelSpec::Intersection(_) => cols.push("attributes_discovered_total"),
        ModelSpec::Quantum(_) => cols.push("intervals_total"),
        ModelSpec::Er(_) => {}
    }
    cols
}

pub fn summaries_to_csv(spec: &ModelSpec, summaries: &[TrialSummary]) -> String {
    let cols = summary_columns(spec);
    let mut out = cols.join(",");
    out.push('\n');
    for s in summaries {
        out.push_str(&format!(
            "{},{},{},{},{}",
            s.trial, s.cmax, s.n_components, s.max_active, s.steps
        ));
        match spec {
            ModelSpec::Regular(_) => {
                out.push_str(&format!(",{}", s.halfedge_excursion_max.unwrap_or(0)))
            }
            ModelSpec::Intersection(_) => {
                out.push_str(&format!(",{}", s.attributes_discovered_total.unwrap_or(0)))
            }
            ModelSpec::Quantum(_) => {
                out.push_str(&format!(",{}", s.intervals_total.unwrap_or(0)))
            }
            ModelSpec::Er(_) => {}
        }
        out.push('\n');
    }
    out
}

pub fn tails_to_csv(curves: &[&TailCurve]) -> String {
    let mut out = String::from("direction,A,threshold,trials,hits,phat,ci_lo,ci_hi\n");
    for curve in curves {
        for r in &curve.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                curve.direction, r.a, r.threshold, r.trials, r.hits, r.phat, r.ci_lo, r.ci_hi
            ));
        }
    }
    out
}
