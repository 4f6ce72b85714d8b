//! Solver backends producing ranked sample sets for a [`Qubo`].

mod exhaustive;
mod oracle;
mod remote;
mod sa;

use std::collections::HashMap;
use std::time::Duration;

use thiserror::Error;

use crate::qubo::Qubo;

pub use exhaustive::{for_each_assignment, solve_exhaustive, Exhaustive, DEFAULT_EXHAUSTIVE_LIMIT};
pub use oracle::{
    solve_schedule_oracle, solve_schedule_oracle_full, OracleSolution, ORACLE_CHOICE_LIMIT,
};
pub use remote::{solve_remote, RemoteConfig, RemoteSampler};
pub use sa::{beta_ladder, solve_sa, SimulatedAnnealing};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("problem too large: {size} exceeds limit {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
    #[error("connection failed: {0}")]
    ConnectionFailed(String),
    #[error("remote solver did not finish within {0:?}")]
    Timeout(Duration),
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("sample {index}: remote energy {remote} but local recomputation gives {local}")]
    EnergyMismatch {
        index: usize,
        remote: i64,
        local: i64,
    },
}

/// One distinct assignment with its exact energy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sample {
    pub assignment: Vec<bool>,
    pub energy: i64,
    pub occurrences: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSetInfo {
    pub backend: String,
    pub num_reads: usize,
    pub num_sweeps: Option<usize>,
    pub seed: Option<u64>,
    pub wall_time: Duration,
}

/// Samples in non-decreasing energy order (ties broken by assignment).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSet {
    pub samples: Vec<Sample>,
    pub info: SampleSetInfo,
}

impl SampleSet {
    /// Merges identical assignments and sorts.
    pub fn from_reads(
        reads: impl IntoIterator<Item = (Vec<bool>, i64, u64)>,
        info: SampleSetInfo,
    ) -> Self {
        let mut merged: HashMap<Vec<bool>, (i64, u64)> = HashMap::new();
        for (assignment, energy, count) in reads {
            merged.entry(assignment).or_insert((energy, 0)).1 += count;
        }
        let mut samples: Vec<Sample> = merged
            .into_iter()
            .map(|(assignment, (energy, occurrences))| Sample {
                assignment,
                energy,
                occurrences,
            })
            .collect();
        samples.sort_by(|a, b| (a.energy, &a.assignment).cmp(&(b.energy, &b.assignment)));
        Self { samples, info }
    }

    pub fn best(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn total_occurrences(&self) -> u64 {
        self.samples.iter().map(|s| s.occurrences).sum()
    }

    pub fn is_sorted(&self) -> bool {
        self.samples.windows(2).all(|w| w[0].energy <= w[1].energy)
    }

    /// Same samples, ignoring wall time.
    pub fn same_samples(&self, other: &SampleSet) -> bool {
        self.samples == other.samples
    }
}

/// Read count, sweeps, seed and inverse-temperature range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub num_reads: usize,
    pub num_sweeps: usize,
    pub seed: u64,
    /// `(beta_min, beta_max)`; `None` derives the range from the model.
    pub beta_range: Option<(f64, f64)>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            num_reads: 1000,
            num_sweeps: 3,
            seed: 0,
            beta_range: None,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if self.num_reads == 0 {
            return Err(SamplerError::InvalidConfig(
                "num_reads must be at least 1".into(),
            ));
        }
        if self.num_sweeps == 0 {
            return Err(SamplerError::InvalidConfig(
                "num_sweeps must be at least 1".into(),
            ));
        }
        if let Some((lo, hi)) = self.beta_range {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(SamplerError::InvalidConfig(format!(
                    "beta range ({lo}, {hi}) must satisfy 0 <= beta_min < beta_max"
                )));
            }
        }
        Ok(())
    }
}

/// A backend that turns a QUBO into a sample set.
pub trait Sampler {
    fn name(&self) -> &str;
    fn sample(&self, qubo: &Qubo) -> Result<SampleSet, SamplerError>;
}
