//! The single-job, two-operation worked example used to calibrate penalty
//! weights.
//!
//! Machines are numbered from zero, so the example's `m1`/`m3` are machines
//! 0 and 2 (factory 0). The alternative machines 1 and 3 sit in factory 1,
//! four time units away; they contribute nothing to the optimal plan but
//! bring the makespan bound to `3 + 3 + 4 = 10`.

use crate::instance::Instance;
use crate::qubo::VariableKey;

pub const WORKED_EXAMPLE_JSON: &str = include_str!("../fixtures/worked_example.json");

pub fn worked_example() -> Instance {
    Instance::from_json(WORKED_EXAMPLE_JSON).expect("bundled fixture parses")
}

/// Operation 1 on `m1` at t = 0.
pub const FIRST_OP_KEY: VariableKey = VariableKey {
    job: 0,
    op: 0,
    machine: 0,
    start: 0,
};

/// Operation 2 on `m3` at t = 1.
pub const SECOND_OP_KEY: VariableKey = VariableKey {
    job: 0,
    op: 1,
    machine: 2,
    start: 1,
};
