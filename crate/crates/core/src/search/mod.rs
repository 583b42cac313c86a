//! Exhaustive and certificate-producing searches: transversals and
//! orthomorphisms, trade-size spectra, and row-permutation support sizes.

pub mod dlx;
pub mod orthomorphisms;
pub mod rowperm_sizes;
pub mod spectrum;
pub mod transversals;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use orthomorphisms::{enumerate_orthomorphisms, min_distance_from_linear, DistanceReport};
pub use rowperm_sizes::{rowperm_sizes, RowPermSearchResult};
pub use spectrum::{reference_spectrum, spectrum, spectrum_all, SpectrumResult};
pub use transversals::{count_transversals, diagonal_histogram, enumerate_transversals, DiagonalHistogram};

/// Largest order searched exhaustively unless forced.
pub const EXHAUSTIVE_ORDER_CAP: usize = 13;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Wall-clock budget; `None` runs to completion.
    pub budget: Option<Duration>,
    /// Worker threads; results do not depend on this.
    pub threads: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { budget: None, threads: 1 }
    }
}

impl SearchOptions {
    pub fn with_budget(mut self, budget: Duration) -> Self {
        self.budget = Some(budget);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    fn deadline(&self, start: Instant) -> Option<Instant> {
        self.budget.map(|b| start + b)
    }
}

/// Why a search returned.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Completed,
    TargetsCovered,
    BudgetExhausted,
}

pub(crate) fn worker_count(threads: usize, jobs: usize) -> usize {
    threads.max(1).min(jobs.max(1))
}
