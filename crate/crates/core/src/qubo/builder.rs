//! Compilation of an instance into the penalty-weighted makespan QUBO
//!
//! `H = alpha * f + beta * g + gamma * h + k` where
//!
//! * `f` counts pairs of start variables of consecutive operations of a job
//!   that leave too little room for processing plus shipping,
//! * `g = Σ (Σ x - 1)^2` over every operation's variables,
//! * `h` counts pairs of distinct-job variables on one machine whose
//!   processing intervals overlap (same start, or the later one starts
//!   before the earlier one finishes),
//! * `k = Σ x (t + p - P)` rewards early completion.

use crate::instance::Instance;

use super::registry::{VariableKey, VariableRegistry};
use super::{Qubo, QuboBuilder, QuboError};

/// Lagrange weights of the precedence, operation-once and no-overlap terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Weights {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
}

impl Weights {
    pub fn new(alpha: i64, beta: i64, gamma: i64) -> Result<Self, QuboError> {
        if alpha < 0 || beta < 0 || gamma < 0 {
            return Err(QuboError::NegativeWeight);
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn uniform(w: i64) -> Result<Self, QuboError> {
        Self::new(w, w, w)
    }
}

/// All three weights equal the registry's makespan bound.
pub fn calibrate_weights(registry: &VariableRegistry) -> Weights {
    let w = registry.t_max();
    Weights {
        alpha: w,
        beta: w,
        gamma: w,
    }
}

fn ptime(instance: &Instance, key: &VariableKey) -> i64 {
    i64::from(
        instance
            .ptime(key.job, key.op, key.machine)
            .expect("registry keys reference eligible machines"),
    )
}

/// Makespan-objective coefficient `t + p - P` of a variable.
pub fn completion_cost(instance: &Instance, registry: &VariableRegistry, key: &VariableKey) -> i64 {
    key.start + ptime(instance, key) - registry.predecessor_time(key.job, key.op)
}

/// Whether `earlier` (operation `o`) and `later` (operation `o + 1` of the
/// same job) violate precedence: `t' - t < p + d`.
fn precedence_conflict(instance: &Instance, earlier: &VariableKey, later: &VariableKey) -> bool {
    let gap = later.start - earlier.start;
    gap < ptime(instance, earlier) + i64::from(instance.distance(earlier.machine, later.machine))
}

/// Membership of a same-machine, distinct-job pair in `A_m ∪ B_m`.
fn overlap_conflict(instance: &Instance, a: &VariableKey, b: &VariableKey) -> bool {
    let (first, second) = if a.start <= b.start { (a, b) } else { (b, a) };
    let gap = second.start - first.start;
    // B_m: equal starts (processing times are always positive)
    // A_m: second starts while the first is still running
    gap == 0 || gap < ptime(instance, first)
}

pub fn build_qubo(instance: &Instance, registry: &VariableRegistry, weights: Weights) -> Qubo {
    let keys = registry.keys();
    let mut b = QuboBuilder::new(keys.len());

    // k(x)
    for (i, key) in keys.iter().enumerate() {
        b.add_linear(i, completion_cost(instance, registry, key));
    }

    // g(x): (Σx - 1)^2 = Σx^2 + 2Σ_{u<v} x_u x_v - 2Σx + 1, and x^2 = x
    for (_, _, group) in registry.groups() {
        b.add_offset(weights.beta);
        for u in group.clone() {
            b.add_linear(u, -weights.beta);
            for v in u + 1..group.end {
                b.add_quadratic(u, v, 2 * weights.beta);
            }
        }
    }

    // f(x): consecutive operations only
    for job in 0..registry.num_jobs() {
        for op in 0..registry.num_operations(job).saturating_sub(1) {
            for u in registry.group(job, op) {
                for v in registry.group(job, op + 1) {
                    if precedence_conflict(instance, &keys[u], &keys[v]) {
                        b.add_quadratic(u, v, weights.alpha);
                    }
                }
            }
        }
    }

    // h(x)
    let mut by_machine = vec![Vec::new(); instance.machines.len()];
    for (i, key) in keys.iter().enumerate() {
        by_machine[key.machine].push(i);
    }
    for vars in &by_machine {
        for (n, &u) in vars.iter().enumerate() {
            for &v in &vars[n + 1..] {
                if keys[u].job != keys[v].job && overlap_conflict(instance, &keys[u], &keys[v]) {
                    b.add_quadratic(u, v, weights.gamma);
                }
            }
        }
    }

    b.build()
}

/// Unweighted values of the four cost terms for one assignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostTerms {
    pub precedence: i64,
    pub once: i64,
    pub overlap: i64,
    pub makespan: i64,
}

impl CostTerms {
    pub fn total(&self, weights: Weights) -> i64 {
        weights.alpha * self.precedence
            + weights.beta * self.once
            + weights.gamma * self.overlap
            + self.makespan
    }

    pub fn penalty_free(&self) -> bool {
        self.precedence == 0 && self.once == 0 && self.overlap == 0
    }
}

/// Evaluates each term of the cost function directly from the set
/// variables, without going through the coefficient maps.
pub fn evaluate_terms(
    instance: &Instance,
    registry: &VariableRegistry,
    assignment: &[bool],
) -> Result<CostTerms, QuboError> {
    if assignment.len() != registry.len() {
        return Err(QuboError::LengthMismatch {
            expected: registry.len(),
            got: assignment.len(),
        });
    }
    let set: Vec<&VariableKey> = registry
        .keys()
        .iter()
        .zip(assignment)
        .filter_map(|(k, &x)| x.then_some(k))
        .collect();

    let mut terms = CostTerms::default();
    for (job, op, _) in registry.groups() {
        let count = set.iter().filter(|k| k.job == job && k.op == op).count() as i64;
        terms.once += (count - 1) * (count - 1);
    }
    for key in &set {
        terms.makespan += completion_cost(instance, registry, key);
    }
    for (n, a) in set.iter().enumerate() {
        for b in &set[n + 1..] {
            if a.job == b.job {
                let (earlier, later) = if a.op < b.op { (a, b) } else { (b, a) };
                if later.op == earlier.op + 1 && precedence_conflict(instance, earlier, later) {
                    terms.precedence += 1;
                }
            } else if a.machine == b.machine && overlap_conflict(instance, a, b) {
                terms.overlap += 1;
            }
        }
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, FIRST_OP_KEY, SECOND_OP_KEY};
    use crate::instance::{Job, Machine, Operation, ShippingMatrix};

    fn worked() -> (Instance, VariableRegistry) {
        let inst = fixtures::worked_example();
        let reg = VariableRegistry::build(&inst).unwrap();
        (inst, reg)
    }

    #[test]
    fn worked_example_energies() {
        let (inst, reg) = worked();
        let both = reg.assignment_of([&FIRST_OP_KEY, &SECOND_OP_KEY]).unwrap();
        let first_only = reg.assignment_of([&FIRST_OP_KEY]).unwrap();

        let unit = build_qubo(&inst, &reg, Weights::new(0, 1, 0).unwrap());
        assert_eq!(unit.energy(&both).unwrap(), 3);
        assert_eq!(unit.energy(&first_only).unwrap(), 2);

        let calibrated = build_qubo(&inst, &reg, calibrate_weights(&reg));
        assert_eq!(calibrated.energy(&both).unwrap(), 3);
        assert_eq!(calibrated.energy(&first_only).unwrap(), 11);
        assert_eq!(calibrated.energy(&vec![false; reg.len()]).unwrap(), 20);
    }

    #[test]
    fn calibration_uses_tmax() {
        let (_, reg) = worked();
        assert_eq!(calibrate_weights(&reg), Weights::uniform(10).unwrap());
        assert!(Weights::new(1, -1, 0).is_err());
    }

    #[test]
    fn calibrated_weights_exceed_every_completion_cost() {
        let (inst, reg) = worked();
        let w = calibrate_weights(&reg);
        let largest = reg
            .keys()
            .iter()
            .map(|k| completion_cost(&inst, &reg, k))
            .max()
            .unwrap();
        assert!(w.alpha > largest && w.beta > largest && w.gamma > largest);
    }

    #[test]
    fn all_zero_energy_is_weight_times_operations() {
        let (inst, reg) = worked();
        let q = build_qubo(&inst, &reg, Weights::uniform(7).unwrap());
        assert_eq!(q.energy(&vec![false; reg.len()]).unwrap(), 7 * 2);
    }

    fn shared_machine() -> Instance {
        Instance {
            factories: 1,
            machines: vec![Machine { id: 0, factory: 0 }],
            shipping: ShippingMatrix::zeros(1),
            jobs: vec![
                Job {
                    id: 0,
                    operations: vec![Operation::new([(0, 2)])],
                },
                Job {
                    id: 1,
                    operations: vec![Operation::new([(0, 3)])],
                },
            ],
        }
    }

    #[test]
    fn overlap_pairs_on_shared_machine() {
        let inst = shared_machine();
        let reg = VariableRegistry::build(&inst).unwrap();
        assert_eq!(reg.t_max(), 5);
        let q = build_qubo(&inst, &reg, Weights::new(0, 0, 1).unwrap());
        let idx = |job, start| {
            reg.index_of(&VariableKey {
                job,
                op: 0,
                machine: 0,
                start,
            })
            .unwrap()
        };
        // job0 (p=2) at 1, job1 (p=3) at 0..=2
        assert_eq!(q.quadratic_coefficient(idx(0, 1), idx(1, 0)), 1);
        assert_eq!(q.quadratic_coefficient(idx(0, 1), idx(1, 1)), 1);
        assert_eq!(q.quadratic_coefficient(idx(0, 1), idx(1, 2)), 1);
        // job0 at 3 ends at 5, job1 at 0 ends at 3: no overlap
        assert_eq!(q.quadratic_coefficient(idx(0, 3), idx(1, 0)), 0);
        // job1 at 0 runs [0, 3); job0 at 2 overlaps
        assert_eq!(q.quadratic_coefficient(idx(0, 2), idx(1, 0)), 1);
    }

    #[test]
    fn precedence_pairs_include_shipping() {
        let inst = Instance {
            factories: 2,
            machines: vec![Machine { id: 0, factory: 0 }, Machine { id: 1, factory: 1 }],
            shipping: ShippingMatrix(vec![vec![0, 3], vec![3, 0]]),
            jobs: vec![Job {
                id: 0,
                operations: vec![Operation::new([(0, 1)]), Operation::new([(1, 1)])],
            }],
        };
        // horizon 8: op0 in [0, 3], op1 in [4, 7]
        let reg = VariableRegistry::with_tmax(&inst, 8).unwrap();
        assert_eq!(reg.group(0, 1).len(), 4);
        let q = build_qubo(&inst, &reg, Weights::new(1, 0, 0).unwrap());
        let key = |op, machine, start| VariableKey {
            job: 0,
            op,
            machine,
            start,
        };
        let a = reg.index_of(&key(0, 0, 3)).unwrap();
        for start in 4..=7 {
            let b = reg.index_of(&key(1, 1, start)).unwrap();
            // needs start - 3 >= 1 + 3
            let expected = i64::from(start < 7);
            assert_eq!(q.quadratic_coefficient(a, b), expected, "start {start}");
        }
    }

    #[test]
    fn term_evaluation_agrees_with_coefficients() {
        let (inst, reg) = worked();
        let w = Weights::new(3, 5, 7).unwrap();
        let q = build_qubo(&inst, &reg, w);
        let n = reg.len();
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for _ in 0..500 {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let bits: Vec<bool> = (0..n).map(|i| (state >> (i % 61)) & 3 == 0).collect();
            let terms = evaluate_terms(&inst, &reg, &bits).unwrap();
            assert_eq!(q.energy(&bits).unwrap(), terms.total(w));
        }
    }

    #[test]
    fn build_is_deterministic() {
        let (inst, reg) = worked();
        let w = calibrate_weights(&reg);
        assert_eq!(build_qubo(&inst, &reg, w), build_qubo(&inst, &reg, w));
    }
}
