//! Time bounds used for variable pruning.

use crate::instance::{Instance, JobId};

/// Upper bound on any sensible makespan: every operation on its slowest
/// machine plus the longest shipping hop between each pair of consecutive
/// operations, summed over all jobs.
pub fn compute_tmax(instance: &Instance) -> i64 {
    let mut total = 0i64;
    for job in &instance.jobs {
        for op in &job.operations {
            total += i64::from(op.max_ptime());
        }
        for pair in job.operations.windows(2) {
            let longest_hop = pair[0]
                .machine_options
                .iter()
                .flat_map(|a| {
                    pair[1]
                        .machine_options
                        .iter()
                        .map(move |b| instance.distance(a.machine, b.machine))
                })
                .max()
                .unwrap_or(0);
            total += i64::from(longest_hop);
        }
    }
    total
}

/// Cheapest way to finish `op` and ship it to wherever `op + 1` runs:
/// `min (p[op][m] + d[m][m'])` over eligible machine pairs.
fn cheapest_handover(instance: &Instance, job: JobId, op: usize) -> i64 {
    let from = instance.operation(job, op);
    let to = instance.operation(job, op + 1);
    from.machine_options
        .iter()
        .flat_map(|a| {
            to.machine_options.iter().map(move |b| {
                i64::from(a.ptime) + i64::from(instance.distance(a.machine, b.machine))
            })
        })
        .min()
        .expect("operations have eligible machines")
}

/// Cheapest way to receive `op` from wherever `op - 1` ran and process it:
/// `min (d[m][m'] + p[op][m'])` over eligible machine pairs.
fn cheapest_arrival(instance: &Instance, job: JobId, op: usize) -> i64 {
    let from = instance.operation(job, op - 1);
    let to = instance.operation(job, op);
    from.machine_options
        .iter()
        .flat_map(|a| {
            to.machine_options.iter().map(move |b| {
                i64::from(instance.distance(a.machine, b.machine)) + i64::from(b.ptime)
            })
        })
        .min()
        .expect("operations have eligible machines")
}

/// Earliest possible start of `op`: the minimum processing plus shipping
/// time of all of its predecessors.
pub fn predecessor_time(instance: &Instance, job: JobId, op: usize) -> i64 {
    (0..op)
        .map(|prev| cheapest_handover(instance, job, prev))
        .sum()
}

/// Minimum time the strict successors of `op` need after it finishes,
/// shipping included.
pub fn successor_time(instance: &Instance, job: JobId, op: usize) -> i64 {
    let len = instance.jobs[job].operations.len();
    (op + 1..len)
        .map(|next| cheapest_arrival(instance, job, next))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::instance::{Job, Machine, Operation, ShippingMatrix};

    fn single_factory(jobs: Vec<Vec<Operation>>, machines: usize) -> Instance {
        Instance {
            factories: 1,
            machines: (0..machines).map(|id| Machine { id, factory: 0 }).collect(),
            shipping: ShippingMatrix::zeros(1),
            jobs: jobs
                .into_iter()
                .enumerate()
                .map(|(id, operations)| Job { id, operations })
                .collect(),
        }
    }

    /// Minimum over every machine chain, enumerated explicitly.
    fn brute_min_chain(instance: &Instance, job: JobId, ops: std::ops::Range<usize>) -> i64 {
        fn go(inst: &Instance, job: JobId, op: usize, end: usize, prev: Option<usize>) -> i64 {
            if op == end {
                return 0;
            }
            inst.operation(job, op)
                .machine_options
                .iter()
                .map(|o| {
                    let ship = prev.map_or(0, |m| i64::from(inst.distance(m, o.machine)));
                    ship + i64::from(o.ptime) + go(inst, job, op + 1, end, Some(o.machine))
                })
                .min()
                .unwrap()
        }
        go(instance, job, ops.start, ops.end, None)
    }

    #[test]
    fn tmax_without_shipping_is_sum_of_ptimes() {
        let inst = single_factory(
            vec![vec![Operation::new([(0, 1)]), Operation::new([(0, 2)])]],
            1,
        );
        assert_eq!(compute_tmax(&inst), 3);
    }

    #[test]
    fn tmax_of_independent_single_op_jobs() {
        let inst = single_factory(
            vec![
                vec![Operation::new([(0, 2)])],
                vec![Operation::new([(0, 3)])],
            ],
            1,
        );
        assert_eq!(compute_tmax(&inst), 5);
    }

    #[test]
    fn worked_example_bounds() {
        let inst = fixtures::worked_example();
        assert_eq!(compute_tmax(&inst), 10);
        assert_eq!(predecessor_time(&inst, 0, 0), 0);
        assert_eq!(predecessor_time(&inst, 0, 1), 1);
        assert_eq!(successor_time(&inst, 0, 0), 2);
        assert_eq!(successor_time(&inst, 0, 1), 0);
    }

    #[test]
    fn predecessor_time_sums_pairwise_minima() {
        // op0 -> op1 cheapest handover is 1 (p=1 on m1, op1 stays on m1);
        // op1 -> op2 cheapest is 4 (p=1 on m1 then ship 3, or p=4 on m2).
        let inst = Instance {
            factories: 2,
            machines: vec![
                Machine { id: 0, factory: 0 },
                Machine { id: 1, factory: 1 },
                Machine { id: 2, factory: 0 },
            ],
            shipping: ShippingMatrix(vec![vec![0, 3], vec![3, 0]]),
            jobs: vec![Job {
                id: 0,
                operations: vec![
                    Operation::new([(0, 2), (1, 1)]),
                    Operation::new([(1, 1), (2, 4)]),
                    Operation::new([(0, 1)]),
                ],
            }],
        };
        let handovers: Vec<i64> = (0..2)
            .map(|op| {
                let mut best = i64::MAX;
                for a in &inst.operation(0, op).machine_options {
                    for b in &inst.operation(0, op + 1).machine_options {
                        best = best.min(
                            i64::from(a.ptime) + i64::from(inst.distance(a.machine, b.machine)),
                        );
                    }
                }
                best
            })
            .collect();
        assert_eq!(handovers, vec![1, 4]);
        assert_eq!(predecessor_time(&inst, 0, 2), 5);
        // chain m1 -> m1 -> m0 arrives at 1 + 1 + 3 = 5, so the bound is tight here
        assert_eq!(predecessor_time(&inst, 0, 1), 1);
        assert_eq!(brute_min_chain(&inst, 0, 0..1), 1);
    }

    #[test]
    fn successor_time_edges() {
        let inst = single_factory(
            vec![
                vec![Operation::new([(0, 1)])],
                vec![Operation::new([(0, 1)]), Operation::new([(0, 2), (1, 5)])],
            ],
            2,
        );
        assert_eq!(successor_time(&inst, 0, 0), 0);
        assert_eq!(successor_time(&inst, 1, 1), 0);
        assert_eq!(successor_time(&inst, 1, 0), 2);
    }

    #[test]
    fn bounds_never_exceed_true_chain_minima() {
        let inst = fixtures::worked_example();
        // P is a lower bound on the time any machine chain needs before op1.
        let chain_to_op1 = inst
            .operation(0, 0)
            .machine_options
            .iter()
            .flat_map(|a| {
                inst.operation(0, 1)
                    .machine_options
                    .iter()
                    .map(move |b| (a, b))
            })
            .map(|(a, b)| i64::from(a.ptime) + i64::from(inst.distance(a.machine, b.machine)))
            .min()
            .unwrap();
        assert!(predecessor_time(&inst, 0, 1) <= chain_to_op1);
        assert!(successor_time(&inst, 0, 0) < brute_min_chain(&inst, 0, 0..2));
    }
}
