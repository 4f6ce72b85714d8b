//! Single-flip Metropolis simulated annealing.
//!
//! Every read starts from a uniformly random assignment and performs one
//! full sweep (in index order) per rung of a geometric inverse-temperature
//! ladder. Read `r` draws from ChaCha8 stream `r` of the configured seed, so
//! results do not depend on how reads are scheduled across threads.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::qubo::Qubo;

use super::{SampleSet, SampleSetInfo, Sampler, SamplerConfig, SamplerError};

const DEFAULT_BETA_MAX: f64 = 10.0;

/// `num_sweeps` inverse temperatures from `beta_min` to `beta_max`,
/// geometrically spaced. A single sweep runs cold.
pub fn beta_ladder(beta_min: f64, beta_max: f64, num_sweeps: usize) -> Vec<f64> {
    if num_sweeps == 1 {
        return vec![beta_max];
    }
    let ratio = (beta_max / beta_min).ln() / (num_sweeps - 1) as f64;
    (0..num_sweeps)
        .map(|k| beta_min * (ratio * k as f64).exp())
        .collect()
}

fn default_beta_range(qubo: &Qubo) -> (f64, f64) {
    let scale = qubo.max_abs_coefficient().max(1) as f64;
    (1.0 / scale, DEFAULT_BETA_MAX)
}

struct Read {
    bits: Vec<bool>,
    energy: i64,
}

fn anneal_once(
    qubo: &Qubo,
    adjacency: &[Vec<(usize, i64)>],
    ladder: &[f64],
    seed: u64,
    read: u64,
) -> Read {
    let n = qubo.num_variables();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);

    let mut bits: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
    // field[i] = a_i + Σ_j b_ij x_j, the energy change of switching i on
    let mut field: Vec<i64> = (0..n).map(|i| qubo.linear_coefficient(i)).collect();
    for (i, row) in adjacency.iter().enumerate() {
        for &(j, c) in row {
            if bits[j] {
                field[i] += c;
            }
        }
    }
    let mut energy = qubo.energy(&bits).expect("length matches");

    for &beta in ladder {
        for i in 0..n {
            let delta = if bits[i] { -field[i] } else { field[i] };
            let accept = delta <= 0 || rng.random::<f64>() < (-beta * delta as f64).exp();
            if accept {
                let sign = if bits[i] { -1 } else { 1 };
                bits[i] = !bits[i];
                energy += delta;
                for &(j, c) in &adjacency[i] {
                    field[j] += sign * c;
                }
            }
        }
    }
    Read { bits, energy }
}

pub fn solve_sa(qubo: &Qubo, config: &SamplerConfig) -> Result<SampleSet, SamplerError> {
    config.validate()?;
    if qubo.num_variables() == 0 {
        return Err(SamplerError::InvalidConfig("model has no variables".into()));
    }
    let (beta_min, beta_max) = config
        .beta_range
        .unwrap_or_else(|| default_beta_range(qubo));
    let ladder = beta_ladder(beta_min, beta_max, config.num_sweeps);
    let adjacency = qubo.adjacency();

    let started = Instant::now();
    let reads: Vec<Read> = (0..config.num_reads as u64)
        .into_par_iter()
        .map(|r| anneal_once(qubo, &adjacency, &ladder, config.seed, r))
        .collect();
    let wall_time = started.elapsed();

    Ok(SampleSet::from_reads(
        reads.into_iter().map(|r| (r.bits, r.energy, 1)),
        SampleSetInfo {
            backend: "sa".into(),
            num_reads: config.num_reads,
            num_sweeps: Some(config.num_sweeps),
            seed: Some(config.seed),
            wall_time,
        },
    ))
}

#[derive(Debug, Clone, Default)]
pub struct SimulatedAnnealing {
    pub config: SamplerConfig,
}

impl Sampler for SimulatedAnnealing {
    fn name(&self) -> &str {
        "sa"
    }

    fn sample(&self, qubo: &Qubo) -> Result<SampleSet, SamplerError> {
        solve_sa(qubo, &self.config)
    }
}
