//! Direct search over schedules, bypassing the QUBO.
//!
//! Each operation picks a machine and a start from its candidate list;
//! precedence (with shipping) and machine exclusivity are enforced while
//! placing. The search keeps the schedule with the smallest makespan and,
//! among those, the smallest sum of completion times.

use crate::instance::Instance;
use crate::qubo::VariableRegistry;
use crate::schedule::{Schedule, ScheduledOp};

use super::SamplerError;

/// Largest product of per-operation candidate counts the oracle accepts.
pub const ORACLE_CHOICE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSolution {
    pub makespan: i64,
    /// Sum over operations of their completion times.
    pub completion_sum: i64,
    pub schedule: Schedule,
}

#[derive(Clone, Copy)]
struct Choice {
    machine: usize,
    start: i64,
    end: i64,
}

struct Search<'a> {
    instance: &'a Instance,
    /// (job, op) in job-major order.
    ops: Vec<(usize, usize)>,
    choices: Vec<Vec<Choice>>,
    placed: Vec<Choice>,
    best: Option<(i64, i64, Vec<Choice>)>,
}

impl Search<'_> {
    fn fits(&self, depth: usize, c: &Choice) -> bool {
        let (job, op) = self.ops[depth];
        if op > 0 {
            // the previous operation of this job was placed just before
            let prev = &self.placed[depth - 1];
            let ready = prev.end + i64::from(self.instance.distance(prev.machine, c.machine));
            if c.start < ready {
                return false;
            }
        }
        self.placed.iter().enumerate().all(|(k, p)| {
            self.ops[k].0 == job || p.machine != c.machine || p.end <= c.start || c.end <= p.start
        })
    }

    fn run(&mut self, depth: usize, makespan: i64, completion: i64) {
        if let Some((best_mk, best_sum, _)) = &self.best {
            if makespan > *best_mk || (makespan == *best_mk && completion >= *best_sum) {
                return;
            }
        }
        if depth == self.ops.len() {
            self.best = Some((makespan, completion, self.placed.clone()));
            return;
        }
        for k in 0..self.choices[depth].len() {
            let c = self.choices[depth][k];
            if !self.fits(depth, &c) {
                continue;
            }
            self.placed.push(c);
            self.run(depth + 1, makespan.max(c.end), completion + c.end);
            self.placed.pop();
        }
    }
}

fn search(
    instance: &Instance,
    candidates: impl Fn(usize, usize) -> Vec<(usize, i64)>,
) -> Result<Option<OracleSolution>, SamplerError> {
    let ops: Vec<(usize, usize)> = instance.operations().map(|(j, o, _)| (j, o)).collect();
    let mut choices = Vec::with_capacity(ops.len());
    let mut product: u128 = 1;
    for &(job, op) in &ops {
        let mut list: Vec<Choice> = candidates(job, op)
            .into_iter()
            .map(|(machine, start)| {
                let p = instance.ptime(job, op, machine).expect("eligible machine");
                Choice {
                    machine,
                    start,
                    end: start + i64::from(p),
                }
            })
            .collect();
        list.sort_by_key(|c| (c.start, c.machine));
        product = product.saturating_mul(list.len() as u128);
        choices.push(list);
    }
    if product > ORACLE_CHOICE_LIMIT {
        return Err(SamplerError::TooLarge {
            size: product,
            limit: ORACLE_CHOICE_LIMIT,
        });
    }

    let mut s = Search {
        instance,
        placed: Vec::with_capacity(ops.len()),
        ops,
        choices,
        best: None,
    };
    s.run(0, 0, 0);
    Ok(s.best.map(|(makespan, completion_sum, placed)| {
        let entries = s
            .ops
            .iter()
            .zip(placed)
            .map(|(&(job, op), c)| ScheduledOp {
                job,
                op,
                machine: c.machine,
                start: c.start,
            })
            .collect();
        OracleSolution {
            makespan,
            completion_sum,
            schedule: Schedule::new(instance, entries),
        }
    }))
}

/// Optimal schedule with starts restricted to the registry's pruned windows.
pub fn solve_schedule_oracle(
    instance: &Instance,
    registry: &VariableRegistry,
) -> Result<OracleSolution, SamplerError> {
    let found = search(instance, |job, op| {
        registry.keys()[registry.group(job, op)]
            .iter()
            .map(|k| (k.machine, k.start))
            .collect()
    })?;
    // the pruned windows always admit the fully serial schedule
    Ok(found.expect("pruned windows contain a feasible schedule"))
}

/// Optimal schedule with every start in `[0, t_max]` on every eligible
/// machine.
pub fn solve_schedule_oracle_full(
    instance: &Instance,
    t_max: i64,
) -> Result<Option<OracleSolution>, SamplerError> {
    search(instance, |job, op| {
        instance
            .operation(job, op)
            .machine_options
            .iter()
            .flat_map(|o| (0..=t_max).map(move |t| (o.machine, t)))
            .collect()
    })
}
