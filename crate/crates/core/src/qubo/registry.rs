use std::collections::HashMap;
use std::ops::Range;

use crate::instance::{Instance, JobId, MachineId};

use super::bounds::{compute_tmax, predecessor_time, successor_time};
use super::QuboError;

/// Binary variable "operation `op` of `job` starts on `machine` at `start`".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariableKey {
    pub job: JobId,
    pub op: usize,
    pub machine: MachineId,
    pub start: i64,
}

/// Dense indexing of the start-time variables that survive pruning.
///
/// Keys are sorted by `(job, op, machine, start)`, so all variables of one
/// operation occupy a contiguous index range.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableRegistry {
    keys: Vec<VariableKey>,
    index: HashMap<VariableKey, usize>,
    t_max: i64,
    predecessor: Vec<Vec<i64>>,
    successor: Vec<Vec<i64>>,
    groups: Vec<Vec<Range<usize>>>,
}

impl VariableRegistry {
    /// Registry over the windows `[P, t_max - p - S]` with `t_max` from
    /// [`compute_tmax`].
    pub fn build(instance: &Instance) -> Result<Self, QuboError> {
        Self::with_tmax(instance, compute_tmax(instance))
    }

    /// Same as [`VariableRegistry::build`] but with an explicit horizon.
    pub fn with_tmax(instance: &Instance, t_max: i64) -> Result<Self, QuboError> {
        let mut keys = Vec::new();
        let mut predecessor = Vec::with_capacity(instance.jobs.len());
        let mut successor = Vec::with_capacity(instance.jobs.len());
        let mut groups = Vec::with_capacity(instance.jobs.len());

        for (job, j) in instance.jobs.iter().enumerate() {
            let mut p_row = Vec::with_capacity(j.operations.len());
            let mut s_row = Vec::with_capacity(j.operations.len());
            let mut g_row = Vec::with_capacity(j.operations.len());
            for (op, operation) in j.operations.iter().enumerate() {
                let earliest = predecessor_time(instance, job, op);
                let tail = successor_time(instance, job, op);
                let first = keys.len();
                let mut options = operation.machine_options.clone();
                options.sort_by_key(|o| o.machine);
                for option in options {
                    let latest = t_max - i64::from(option.ptime) - tail;
                    for start in earliest..=latest {
                        keys.push(VariableKey {
                            job,
                            op,
                            machine: option.machine,
                            start,
                        });
                    }
                }
                if keys.len() == first {
                    return Err(QuboError::InfeasibleWindow { job, op, t_max });
                }
                p_row.push(earliest);
                s_row.push(tail);
                g_row.push(first..keys.len());
            }
            predecessor.push(p_row);
            successor.push(s_row);
            groups.push(g_row);
        }

        let index = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        Ok(Self {
            keys,
            index,
            t_max,
            predecessor,
            successor,
            groups,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[VariableKey] {
        &self.keys
    }

    pub fn key(&self, index: usize) -> VariableKey {
        self.keys[index]
    }

    pub fn index_of(&self, key: &VariableKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn t_max(&self) -> i64 {
        self.t_max
    }

    pub fn predecessor_time(&self, job: JobId, op: usize) -> i64 {
        self.predecessor[job][op]
    }

    pub fn successor_time(&self, job: JobId, op: usize) -> i64 {
        self.successor[job][op]
    }

    /// Index range holding every variable of `(job, op)`.
    pub fn group(&self, job: JobId, op: usize) -> Range<usize> {
        self.groups[job][op].clone()
    }

    /// All `(job, op)` groups in job-major order.
    pub fn groups(&self) -> impl Iterator<Item = (JobId, usize, Range<usize>)> + '_ {
        self.groups.iter().enumerate().flat_map(|(job, row)| {
            row.iter()
                .enumerate()
                .map(move |(op, r)| (job, op, r.clone()))
        })
    }

    pub fn num_jobs(&self) -> usize {
        self.groups.len()
    }

    pub fn num_operations(&self, job: JobId) -> usize {
        self.groups[job].len()
    }

    /// Assignment with exactly the given keys set.
    ///
    /// Returns `None` if any key was pruned.
    pub fn assignment_of<'a>(
        &self,
        keys: impl IntoIterator<Item = &'a VariableKey>,
    ) -> Option<Vec<bool>> {
        let mut bits = vec![false; self.len()];
        for key in keys {
            bits[self.index_of(key)?] = true;
        }
        Some(bits)
    }
}
