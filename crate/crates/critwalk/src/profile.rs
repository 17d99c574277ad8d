//! Per-trial component statistics shared by every exploration engine.

use serde::{Deserialize, Serialize};

/// One trial's component sizes, excursion boundaries and walk statistics.
///
/// `excursion_bounds` starts at 0 and then lists every step index at which
/// the active count returned to zero. For the vertex-step engines (binomial,
/// intersection, reduced quantum) `sizes[i] == bounds[i+1] - bounds[i]`
/// exactly; the stub-level engine counts sizes in vertices while bounds track
/// half-edge steps, and appends excursion-less singletons at the tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentProfile {
    pub sizes: Vec<u64>,
    pub excursion_bounds: Vec<u64>,
    pub max_active: u64,
    pub steps: u64,
}

impl ComponentProfile {
    /// Largest component size (units depend on the model: vertices or intervals).
    pub fn cmax(&self) -> u64 {
        self.sizes.iter().copied().max().unwrap_or(0)
    }

    pub fn n_components(&self) -> usize {
        self.sizes.len()
    }

    /// Excursion lengths `t_i - t_{i-1}` of the driving walk.
    pub fn excursion_lengths(&self) -> Vec<u64> {
        self.excursion_bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Component sizes as a sorted (descending) multiset.
    pub fn sorted_sizes(&self) -> Vec<u64> {
        let mut s = self.sizes.clone();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

/// Records the zero-hitting times and running maximum of an active-count walk.
#[derive(Debug, Clone)]
pub(crate) struct WalkRecorder {
    pub bounds: Vec<u64>,
    pub max_active: u64,
}

impl WalkRecorder {
    pub fn new() -> Self {
        WalkRecorder { bounds: vec![0], max_active: 0 }
    }

    #[inline]
    pub fn record(&mut self, step: u64, active: u64) {
        if active > self.max_active {
            self.max_active = active;
        }
        if active == 0 {
            self.bounds.push(step);
        }
    }

    /// Profile for the engines whose step count equals the unit count, where
    /// component sizes are exactly the excursion lengths.
    pub fn into_unit_profile(self, steps: u64) -> ComponentProfile {
        let sizes = self.bounds.windows(2).map(|w| w[1] - w[0]).collect();
        ComponentProfile {
            sizes,
            excursion_bounds: self.bounds,
            max_active: self.max_active,
            steps,
        }
    }
}
