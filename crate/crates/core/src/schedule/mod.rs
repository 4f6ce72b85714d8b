//! Decoded schedules, constraint checks and rendering.

mod export;
mod gantt;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::instance::{Instance, JobId, MachineId};
use crate::qubo::{VariableKey, VariableRegistry};

pub use gantt::render_gantt;

/// One operation placed on a machine at a start time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScheduledOp {
    pub job: JobId,
    pub op: usize,
    pub machine: MachineId,
    pub start: i64,
}

impl From<VariableKey> for ScheduledOp {
    fn from(k: VariableKey) -> Self {
        Self {
            job: k.job,
            op: k.op,
            machine: k.machine,
            start: k.start,
        }
    }
}

impl From<ScheduledOp> for VariableKey {
    fn from(s: ScheduledOp) -> Self {
        Self {
            job: s.job,
            op: s.op,
            machine: s.machine,
            start: s.start,
        }
    }
}

/// A possibly partial or over-full plan. Entries are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    entries: Vec<ScheduledOp>,
    complete: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("schedule is incomplete")]
    IncompleteSchedule,
    #[error("entry {0:?} does not reference an eligible (job, operation, machine)")]
    UnknownReference(ScheduledOp),
    #[error("assignment has {got} entries, registry has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("schedule line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn is_complete(shape: &[usize], entries: &[ScheduledOp]) -> bool {
    let mut counts: BTreeMap<(JobId, usize), usize> = BTreeMap::new();
    for e in entries {
        *counts.entry((e.job, e.op)).or_default() += 1;
    }
    let expected: usize = shape.iter().sum();
    counts.len() == expected
        && counts
            .iter()
            .all(|(&(job, op), &c)| c == 1 && job < shape.len() && op < shape[job])
}

fn shape_of(instance: &Instance) -> Vec<usize> {
    instance.jobs.iter().map(|j| j.operations.len()).collect()
}

impl Schedule {
    pub fn new(instance: &Instance, mut entries: Vec<ScheduledOp>) -> Self {
        entries.sort();
        let complete = is_complete(&shape_of(instance), &entries);
        Self { entries, complete }
    }

    pub fn entries(&self) -> &[ScheduledOp] {
        &self.entries
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every entry must name an eligible machine of an existing operation.
    pub fn check_references(&self, instance: &Instance) -> Result<(), ScheduleError> {
        match self
            .entries
            .iter()
            .find(|e| instance.ptime(e.job, e.op, e.machine).is_none())
        {
            Some(e) => Err(ScheduleError::UnknownReference(*e)),
            None => Ok(()),
        }
    }

    /// Sets exactly this schedule's bits. `None` if an entry was pruned.
    pub fn encode(&self, registry: &VariableRegistry) -> Option<Vec<bool>> {
        let keys: Vec<VariableKey> = self.entries.iter().map(|&e| e.into()).collect();
        registry.assignment_of(keys.iter())
    }
}

/// One entry per set bit. Operations without a set bit leave a gap.
pub fn decode(registry: &VariableRegistry, assignment: &[bool]) -> Result<Schedule, ScheduleError> {
    if assignment.len() != registry.len() {
        return Err(ScheduleError::LengthMismatch {
            expected: registry.len(),
            got: assignment.len(),
        });
    }
    let entries: Vec<ScheduledOp> = registry
        .keys()
        .iter()
        .zip(assignment)
        .filter(|&(_, &x)| x)
        .map(|(k, _)| (*k).into())
        .collect();
    let shape: Vec<usize> = (0..registry.num_jobs())
        .map(|j| registry.num_operations(j))
        .collect();
    let complete = is_complete(&shape, &entries);
    Ok(Schedule { entries, complete })
}

fn ptime(instance: &Instance, e: &ScheduledOp) -> i64 {
    i64::from(
        instance
            .ptime(e.job, e.op, e.machine)
            .expect("schedule entries reference eligible machines"),
    )
}

fn end_time(instance: &Instance, e: &ScheduledOp) -> i64 {
    e.start + ptime(instance, e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecedenceViolation {
    pub earlier: ScheduledOp,
    pub later: ScheduledOp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiplicityViolation {
    pub job: JobId,
    pub op: usize,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlapViolation {
    pub machine: MachineId,
    pub first: ScheduledOp,
    pub second: ScheduledOp,
}

/// Broken constraints, one record per offending pair or operation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ViolationReport {
    pub precedence: Vec<PrecedenceViolation>,
    pub multiplicity: Vec<MultiplicityViolation>,
    pub overlap: Vec<OverlapViolation>,
}

impl ViolationReport {
    pub fn is_valid(&self) -> bool {
        self.precedence.is_empty() && self.multiplicity.is_empty() && self.overlap.is_empty()
    }

    pub fn total(&self) -> usize {
        self.precedence.len() + self.multiplicity.len() + self.overlap.len()
    }

    /// Unweighted penalty units matching the cost function terms
    /// `(precedence, operation-once, no-overlap)`; an operation scheduled
    /// `c` times contributes `(c - 1)^2`.
    pub fn penalty_units(&self) -> (i64, i64, i64) {
        let once = self
            .multiplicity
            .iter()
            .map(|m| {
                let d = m.count as i64 - 1;
                d * d
            })
            .sum();
        (
            self.precedence.len() as i64,
            once,
            self.overlap.len() as i64,
        )
    }
}

impl fmt::Display for ViolationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "precedence: {}, multiplicity: {}, overlap: {}",
            self.precedence.len(),
            self.multiplicity.len(),
            self.overlap.len()
        )?;
        for v in &self.precedence {
            writeln!(
                f,
                "  precedence: job {} op {} on m{} at {} too close to op {} on m{} at {}",
                v.earlier.job,
                v.earlier.op,
                v.earlier.machine,
                v.earlier.start,
                v.later.op,
                v.later.machine,
                v.later.start
            )?;
        }
        for v in &self.multiplicity {
            writeln!(
                f,
                "  multiplicity: job {} op {} scheduled {} times",
                v.job, v.op, v.count
            )?;
        }
        for v in &self.overlap {
            writeln!(
                f,
                "  overlap on m{}: job {} op {} at {} and job {} op {} at {}",
                v.machine,
                v.first.job,
                v.first.op,
                v.first.start,
                v.second.job,
                v.second.op,
                v.second.start
            )?;
        }
        Ok(())
    }
}

/// Checks precedence (with shipping), start-once and no-overlap.
pub fn validate_schedule(instance: &Instance, schedule: &Schedule) -> ViolationReport {
    let mut report = ViolationReport::default();
    let mut by_op: BTreeMap<(JobId, usize), Vec<&ScheduledOp>> = BTreeMap::new();
    for e in schedule.entries() {
        by_op.entry((e.job, e.op)).or_default().push(e);
    }

    for (job, j) in instance.jobs.iter().enumerate() {
        for op in 0..j.operations.len() {
            let count = by_op.get(&(job, op)).map_or(0, Vec::len);
            if count != 1 {
                report
                    .multiplicity
                    .push(MultiplicityViolation { job, op, count });
            }
            if op + 1 == j.operations.len() {
                continue;
            }
            let (Some(current), Some(next)) = (by_op.get(&(job, op)), by_op.get(&(job, op + 1)))
            else {
                continue;
            };
            for a in current {
                for b in next {
                    let ready =
                        end_time(instance, a) + i64::from(instance.distance(a.machine, b.machine));
                    if b.start < ready {
                        report.precedence.push(PrecedenceViolation {
                            earlier: **a,
                            later: **b,
                        });
                    }
                }
            }
        }
    }

    let entries = schedule.entries();
    for (n, a) in entries.iter().enumerate() {
        for b in &entries[n + 1..] {
            if a.machine != b.machine || a.job == b.job {
                continue;
            }
            let intersects = a.start < end_time(instance, b) && b.start < end_time(instance, a);
            if intersects {
                let (first, second) = if (a.start, a) <= (b.start, b) {
                    (*a, *b)
                } else {
                    (*b, *a)
                };
                report.overlap.push(OverlapViolation {
                    machine: a.machine,
                    first,
                    second,
                });
            }
        }
    }
    report
}

/// Completion time of the last operation.
pub fn makespan(instance: &Instance, schedule: &Schedule) -> Result<i64, ScheduleError> {
    if !schedule.is_complete() {
        return Err(ScheduleError::IncompleteSchedule);
    }
    Ok(schedule
        .entries()
        .iter()
        .map(|e| end_time(instance, e))
        .max()
        .unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, FIRST_OP_KEY, SECOND_OP_KEY};
    use crate::instance::{Job, Machine, Operation, ShippingMatrix};

    fn at(job: JobId, op: usize, machine: MachineId, start: i64) -> ScheduledOp {
        ScheduledOp {
            job,
            op,
            machine,
            start,
        }
    }

    #[test]
    fn decode_worked_assignment() {
        let inst = fixtures::worked_example();
        let reg = VariableRegistry::build(&inst).unwrap();
        let bits = reg.assignment_of([&FIRST_OP_KEY, &SECOND_OP_KEY]).unwrap();
        let s = decode(&reg, &bits).unwrap();
        assert_eq!(s.entries(), &[at(0, 0, 0, 0), at(0, 1, 2, 1)]);
        assert!(s.is_complete());
        assert!(validate_schedule(&inst, &s).is_valid());
        assert_eq!(makespan(&inst, &s), Ok(3));
        assert_eq!(s.encode(&reg), Some(bits));
    }

    #[test]
    fn decode_all_zero_and_duplicates() {
        let inst = fixtures::worked_example();
        let reg = VariableRegistry::build(&inst).unwrap();
        let empty = decode(&reg, &vec![false; reg.len()]).unwrap();
        assert!(empty.is_empty());
        assert!(!empty.is_complete());
        assert_eq!(
            makespan(&inst, &empty),
            Err(ScheduleError::IncompleteSchedule)
        );

        let mut bits = reg.assignment_of([&FIRST_OP_KEY, &SECOND_OP_KEY]).unwrap();
        bits[reg.group(0, 0).start + 3] = true;
        let s = decode(&reg, &bits).unwrap();
        assert_eq!(s.entries().len(), 3);
        assert!(!s.is_complete());
        let report = validate_schedule(&inst, &s);
        assert_eq!(
            report.multiplicity,
            vec![MultiplicityViolation {
                job: 0,
                op: 0,
                count: 2
            }]
        );
        assert!(decode(&reg, &[true]).is_err());
    }

    fn shared() -> Instance {
        Instance {
            factories: 2,
            machines: vec![Machine { id: 0, factory: 0 }, Machine { id: 1, factory: 1 }],
            shipping: ShippingMatrix(vec![vec![0, 2], vec![2, 0]]),
            jobs: vec![
                Job {
                    id: 0,
                    operations: vec![Operation::new([(0, 1)]), Operation::new([(1, 1)])],
                },
                Job {
                    id: 1,
                    operations: vec![Operation::new([(0, 4)])],
                },
            ],
        }
    }

    #[test]
    fn equal_start_overlap() {
        let inst = shared();
        let s = Schedule::new(&inst, vec![at(0, 0, 0, 0), at(0, 1, 1, 3), at(1, 0, 0, 0)]);
        let report = validate_schedule(&inst, &s);
        assert_eq!(report.overlap.len(), 1);
        assert!(report.precedence.is_empty());
        assert_eq!(report.penalty_units(), (0, 0, 1));
    }

    #[test]
    fn shipping_gap_too_short() {
        let inst = shared();
        // op0 ends at 1, shipping 2 -> op1 ready at 3, starts at 2
        let s = Schedule::new(&inst, vec![at(0, 0, 0, 0), at(0, 1, 1, 2), at(1, 0, 0, 1)]);
        let report = validate_schedule(&inst, &s);
        assert_eq!(report.precedence.len(), 1);
        assert_eq!(report.overlap.len(), 0);
        assert_eq!(makespan(&inst, &s), Ok(5));
    }

    #[test]
    fn single_op_makespan() {
        let inst = Instance {
            factories: 1,
            machines: vec![Machine { id: 0, factory: 0 }],
            shipping: ShippingMatrix::zeros(1),
            jobs: vec![Job {
                id: 0,
                operations: vec![Operation::new([(0, 4)])],
            }],
        };
        let s = Schedule::new(&inst, vec![at(0, 0, 0, 0)]);
        assert_eq!(makespan(&inst, &s), Ok(4));
    }

    #[test]
    fn unknown_reference() {
        let inst = shared();
        let s = Schedule::new(&inst, vec![at(1, 0, 1, 0)]);
        assert!(matches!(
            s.check_references(&inst),
            Err(ScheduleError::UnknownReference(_))
        ));
    }
}
