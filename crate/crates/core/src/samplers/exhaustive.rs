//! Brute-force enumeration of all `2^n` assignments in Gray-code order.

use std::collections::BinaryHeap;
use std::time::Instant;

use crate::qubo::Qubo;

use super::{SampleSet, SampleSetInfo, Sampler, SamplerError};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 24;

fn check_size(qubo: &Qubo, limit: usize) -> Result<(), SamplerError> {
    let n = qubo.num_variables();
    if n > limit || n > 63 {
        return Err(SamplerError::TooLarge {
            size: n as u128,
            limit: limit.min(63) as u128,
        });
    }
    Ok(())
}

/// Calls `visit(mask, energy)` for every assignment, bit `i` of `mask`
/// being `x_i`. Each step flips one bit and updates the energy
/// incrementally.
pub fn for_each_assignment(
    qubo: &Qubo,
    limit: usize,
    mut visit: impl FnMut(u64, i64),
) -> Result<(), SamplerError> {
    check_size(qubo, limit)?;
    let n = qubo.num_variables();
    let adjacency = qubo.adjacency();
    let mut field: Vec<i64> = (0..n).map(|i| qubo.linear_coefficient(i)).collect();
    let mut mask = 0u64;
    let mut energy = qubo.offset();
    visit(mask, energy);
    for step in 1u64..(1u64 << n) {
        let i = step.trailing_zeros() as usize;
        let on = mask >> i & 1 == 1;
        if on {
            energy -= field[i];
        } else {
            energy += field[i];
        }
        mask ^= 1 << i;
        let sign = if on { -1 } else { 1 };
        for &(j, c) in &adjacency[i] {
            field[j] += sign * c;
        }
        visit(mask, energy);
    }
    Ok(())
}

/// The `top_k` lowest-energy assignments, ranked.
pub fn solve_exhaustive(
    qubo: &Qubo,
    limit: usize,
    top_k: usize,
) -> Result<SampleSet, SamplerError> {
    let started = Instant::now();
    let mut heap: BinaryHeap<(i64, u64)> = BinaryHeap::with_capacity(top_k + 1);
    for_each_assignment(qubo, limit, |mask, energy| {
        if heap.len() < top_k {
            heap.push((energy, mask));
        } else if let Some(&worst) = heap.peek() {
            if (energy, mask) < worst {
                heap.pop();
                heap.push((energy, mask));
            }
        }
    })?;
    let n = qubo.num_variables();
    let wall_time = started.elapsed();
    let samples = heap.into_iter().map(|(energy, mask)| {
        let bits = (0..n).map(|i| mask >> i & 1 == 1).collect();
        (bits, energy, 1)
    });
    Ok(SampleSet::from_reads(
        samples,
        SampleSetInfo {
            backend: "exhaustive".into(),
            num_reads: top_k,
            num_sweeps: None,
            seed: None,
            wall_time,
        },
    ))
}

#[derive(Debug, Clone)]
pub struct Exhaustive {
    pub limit: usize,
    pub top_k: usize,
}

impl Default for Exhaustive {
    fn default() -> Self {
        Self {
            limit: DEFAULT_EXHAUSTIVE_LIMIT,
            top_k: 16,
        }
    }
}

impl Sampler for Exhaustive {
    fn name(&self) -> &str {
        "exhaustive"
    }

    fn sample(&self, qubo: &Qubo) -> Result<SampleSet, SamplerError> {
        solve_exhaustive(qubo, self.limit, self.top_k)
    }
}
