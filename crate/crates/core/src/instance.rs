//! Domain model for the distributed flexible job shop.
//!
//! An [`Instance`] holds jobs made of ordered operations, the machines that
//! can process each operation (with a per-machine processing time), the
//! machine to factory assignment and the symmetric factory shipping matrix.
//! Shipping time between two machines is derived from their factories.
//!
//! The on-disk form is a JSON document whose shape is exactly the serde
//! shape of [`Instance`]; unknown keys are rejected.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a factory, `0..factories`.
pub type FactoryId = usize;
/// Index of a machine, `0..machines.len()`.
pub type MachineId = usize;
/// Index of a job, `0..jobs.len()`.
pub type JobId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Machine {
    pub id: MachineId,
    pub factory: FactoryId,
}

/// One eligible machine for an operation together with its processing time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineOption {
    pub machine: MachineId,
    pub ptime: u32,
}

/// A production step. Its position in [`Job::operations`] is its order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operation {
    pub machine_options: Vec<MachineOption>,
}

impl Operation {
    pub fn new(options: impl IntoIterator<Item = (MachineId, u32)>) -> Self {
        Self {
            machine_options: options
                .into_iter()
                .map(|(machine, ptime)| MachineOption { machine, ptime })
                .collect(),
        }
    }

    /// Processing time on `machine`, if the machine is eligible.
    pub fn ptime(&self, machine: MachineId) -> Option<u32> {
        self.machine_options
            .iter()
            .find(|o| o.machine == machine)
            .map(|o| o.ptime)
    }

    pub fn max_ptime(&self) -> u32 {
        self.machine_options
            .iter()
            .map(|o| o.ptime)
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Job {
    pub id: JobId,
    pub operations: Vec<Operation>,
}

/// Factory-to-factory shipping times, row major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShippingMatrix(pub Vec<Vec<u32>>);

impl ShippingMatrix {
    /// All-zero matrix for `factories` factories.
    pub fn zeros(factories: usize) -> Self {
        Self(vec![vec![0; factories]; factories])
    }

    pub fn get(&self, from: FactoryId, to: FactoryId) -> u32 {
        self.0[from][to]
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub factories: usize,
    pub machines: Vec<Machine>,
    pub shipping: ShippingMatrix,
    pub jobs: Vec<Job>,
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("failed to read instance file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// Malformed JSON or a document that does not match the schema. The
    /// message carries the offending field and the line/column.
    #[error("instance document error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Instance {
    pub fn machine(&self, id: MachineId) -> &Machine {
        &self.machines[id]
    }

    /// Shipping time between two machines, derived from their factories.
    pub fn distance(&self, from: MachineId, to: MachineId) -> u32 {
        self.shipping
            .get(self.machines[from].factory, self.machines[to].factory)
    }

    pub fn operation(&self, job: JobId, op: usize) -> &Operation {
        &self.jobs[job].operations[op]
    }

    pub fn ptime(&self, job: JobId, op: usize, machine: MachineId) -> Option<u32> {
        self.jobs
            .get(job)
            .and_then(|j| j.operations.get(op))
            .and_then(|o| o.ptime(machine))
    }

    pub fn num_operations(&self) -> usize {
        self.jobs.iter().map(|j| j.operations.len()).sum()
    }

    /// Iterates `(job, op, &Operation)` in job-major order.
    pub fn operations(&self) -> impl Iterator<Item = (JobId, usize, &Operation)> {
        self.jobs.iter().enumerate().flat_map(|(i, job)| {
            job.operations
                .iter()
                .enumerate()
                .map(move |(o, op)| (i, o, op))
        })
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }

    pub fn from_json(text: &str) -> Result<Self, InstanceError> {
        serde_json::from_str(text).map_err(|e| InstanceError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Canonical text form: pretty JSON with two-space indent and a
    /// trailing newline.
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("instance serializes");
        text.push('\n');
        text
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|source| InstanceError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

/// A broken invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoFactories,
    NoJobs,
    MachineIdMismatch {
        position: usize,
        id: MachineId,
    },
    UnknownFactory {
        machine: MachineId,
        factory: FactoryId,
    },
    ShippingShape {
        rows: usize,
        expected: usize,
    },
    ShippingRowShape {
        row: usize,
        len: usize,
        expected: usize,
    },
    ShippingDiagonal {
        factory: FactoryId,
        value: u32,
    },
    ShippingAsymmetric {
        from: FactoryId,
        to: FactoryId,
    },
    JobIdMismatch {
        position: usize,
        id: JobId,
    },
    EmptyJob {
        job: JobId,
    },
    NoEligibleMachine {
        job: JobId,
        op: usize,
    },
    UnknownMachine {
        job: JobId,
        op: usize,
        machine: MachineId,
    },
    DuplicateMachine {
        job: JobId,
        op: usize,
        machine: MachineId,
    },
    ZeroProcessingTime {
        job: JobId,
        op: usize,
        machine: MachineId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            NoFactories => write!(f, "instance has no factories"),
            NoJobs => write!(f, "instance has no jobs"),
            MachineIdMismatch { position, id } => {
                write!(
                    f,
                    "machine at position {position} has id {id}; ids must be contiguous"
                )
            }
            UnknownFactory { machine, factory } => {
                write!(f, "machine {machine}: unknown factory {factory}")
            }
            ShippingShape { rows, expected } => {
                write!(f, "shipping: {rows} rows, expected {expected}")
            }
            ShippingRowShape { row, len, expected } => {
                write!(f, "shipping row {row}: {len} entries, expected {expected}")
            }
            ShippingDiagonal { factory, value } => {
                write!(
                    f,
                    "shipping[{factory}][{factory}] = {value}, diagonal must be zero"
                )
            }
            ShippingAsymmetric { from, to } => {
                write!(
                    f,
                    "shipping[{from}][{to}] != shipping[{to}][{from}], matrix must be symmetric"
                )
            }
            JobIdMismatch { position, id } => {
                write!(
                    f,
                    "job at position {position} has id {id}; ids must be contiguous"
                )
            }
            EmptyJob { job } => write!(f, "job {job} has no operations"),
            NoEligibleMachine { job, op } => {
                write!(f, "job {job} operation {op} has no eligible machine")
            }
            UnknownMachine { job, op, machine } => {
                write!(f, "job {job} operation {op}: unknown machine {machine}")
            }
            DuplicateMachine { job, op, machine } => {
                write!(
                    f,
                    "job {job} operation {op}: machine {machine} listed twice"
                )
            }
            ZeroProcessingTime { job, op, machine } => write!(
                f,
                "job {job} operation {op} on machine {machine}: processing time must be ≥ 1"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "instance is valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

#[allow(clippy::needless_range_loop)]
pub fn validate(instance: &Instance) -> ValidationReport {
    let mut violations = Vec::new();
    let factories = instance.factories;
    if factories == 0 {
        violations.push(Violation::NoFactories);
    }

    for (position, machine) in instance.machines.iter().enumerate() {
        if machine.id != position {
            violations.push(Violation::MachineIdMismatch {
                position,
                id: machine.id,
            });
        }
        if machine.factory >= factories {
            violations.push(Violation::UnknownFactory {
                machine: machine.id,
                factory: machine.factory,
            });
        }
    }

    let rows = instance.shipping.rows();
    if rows.len() != factories {
        violations.push(Violation::ShippingShape {
            rows: rows.len(),
            expected: factories,
        });
    } else if let Some((row, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != factories) {
        violations.push(Violation::ShippingRowShape {
            row,
            len: r.len(),
            expected: factories,
        });
    } else {
        for f in 0..factories {
            if rows[f][f] != 0 {
                violations.push(Violation::ShippingDiagonal {
                    factory: f,
                    value: rows[f][f],
                });
            }
            for g in f + 1..factories {
                if rows[f][g] != rows[g][f] {
                    violations.push(Violation::ShippingAsymmetric { from: f, to: g });
                }
            }
        }
    }

    if instance.jobs.is_empty() {
        violations.push(Violation::NoJobs);
    }
    for (position, job) in instance.jobs.iter().enumerate() {
        if job.id != position {
            violations.push(Violation::JobIdMismatch {
                position,
                id: job.id,
            });
        }
        if job.operations.is_empty() {
            violations.push(Violation::EmptyJob { job: job.id });
        }
        for (op, operation) in job.operations.iter().enumerate() {
            if operation.machine_options.is_empty() {
                violations.push(Violation::NoEligibleMachine { job: job.id, op });
            }
            let mut seen = BTreeSet::new();
            for option in &operation.machine_options {
                if option.machine >= instance.machines.len() {
                    violations.push(Violation::UnknownMachine {
                        job: job.id,
                        op,
                        machine: option.machine,
                    });
                }
                if !seen.insert(option.machine) {
                    violations.push(Violation::DuplicateMachine {
                        job: job.id,
                        op,
                        machine: option.machine,
                    });
                }
                if option.ptime == 0 {
                    violations.push(Violation::ZeroProcessingTime {
                        job: job.id,
                        op,
                        machine: option.machine,
                    });
                }
            }
        }
    }

    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn two_factory_instance() -> Instance {
        Instance {
            factories: 2,
            machines: vec![Machine { id: 0, factory: 0 }, Machine { id: 1, factory: 1 }],
            shipping: ShippingMatrix(vec![vec![0, 3], vec![3, 0]]),
            jobs: vec![
                Job {
                    id: 0,
                    operations: vec![Operation::new([(0, 1)]), Operation::new([(1, 2)])],
                },
                Job {
                    id: 1,
                    operations: vec![Operation::new([(0, 2), (1, 1)])],
                },
            ],
        }
    }

    #[test]
    fn worked_example_is_valid() {
        assert!(fixtures::worked_example().validate().is_valid());
    }

    #[test]
    fn unknown_factory_is_reported() {
        let mut inst = two_factory_instance();
        inst.machines[1].factory = 5;
        let report = inst.validate();
        assert_eq!(
            report.violations,
            vec![Violation::UnknownFactory {
                machine: 1,
                factory: 5
            }]
        );
        assert!(report.to_string().contains("unknown factory"));
    }

    #[test]
    fn zero_processing_time_is_reported() {
        let mut inst = two_factory_instance();
        inst.jobs[1].operations[0].machine_options[1].ptime = 0;
        let report = inst.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.to_string().contains("processing time must be ≥ 1"));
    }

    #[test]
    fn shipping_rules() {
        let mut inst = two_factory_instance();
        inst.shipping = ShippingMatrix(vec![vec![1, 3], vec![2, 0]]);
        let report = inst.validate();
        assert!(report.violations.contains(&Violation::ShippingDiagonal {
            factory: 0,
            value: 1
        }));
        assert!(report
            .violations
            .contains(&Violation::ShippingAsymmetric { from: 0, to: 1 }));

        inst.shipping = ShippingMatrix(vec![vec![0, 3]]);
        assert_eq!(
            inst.validate().violations,
            vec![Violation::ShippingShape {
                rows: 1,
                expected: 2
            }]
        );
    }

    #[test]
    fn structural_violations() {
        let mut inst = two_factory_instance();
        inst.jobs[0].operations[0] = Operation::new([(0, 1), (0, 2), (7, 1)]);
        inst.jobs[1].operations.clear();
        inst.machines[0].id = 4;
        let v = inst.validate().violations;
        assert!(v.contains(&Violation::DuplicateMachine {
            job: 0,
            op: 0,
            machine: 0
        }));
        assert!(v.contains(&Violation::UnknownMachine {
            job: 0,
            op: 0,
            machine: 7
        }));
        assert!(v.contains(&Violation::EmptyJob { job: 1 }));
        assert!(v.contains(&Violation::MachineIdMismatch { position: 0, id: 4 }));

        let empty = Instance {
            jobs: vec![],
            ..two_factory_instance()
        };
        assert_eq!(empty.validate().violations, vec![Violation::NoJobs]);
    }

    #[test]
    fn same_factory_machines_ship_for_free() {
        let inst = fixtures::worked_example();
        for a in &inst.machines {
            for b in &inst.machines {
                if a.factory == b.factory {
                    assert_eq!(inst.distance(a.id, b.id), 0);
                }
            }
        }
        assert_eq!(inst.distance(0, 1), 4);
    }

    const SAMPLE: &str = r#"{
  "factories": 2,
  "machines": [ { "id": 0, "factory": 0 }, { "id": 1, "factory": 1 } ],
  "shipping": [ [0, 3], [3, 0] ],
  "jobs": [
    { "id": 0, "operations": [ { "machine_options": [ { "machine": 0, "ptime": 1 } ] },
                               { "machine_options": [ { "machine": 1, "ptime": 2 } ] } ] },
    { "id": 1, "operations": [ { "machine_options": [ { "machine": 0, "ptime": 2 },
                                                      { "machine": 1, "ptime": 1 } ] } ] }
  ]
}"#;

    #[test]
    fn loads_sample_document() {
        let inst = Instance::from_json(SAMPLE).unwrap();
        assert_eq!(inst.jobs.len(), 2);
        assert_eq!(inst, two_factory_instance());
        let canonical = inst.to_json();
        assert_eq!(
            Instance::from_json(&canonical).unwrap().to_json(),
            canonical
        );
    }

    #[test]
    fn missing_shipping_names_the_field() {
        let text = r#"{"factories": 1, "machines": [], "jobs": []}"#;
        let err = Instance::from_json(text).unwrap_err();
        assert!(err.to_string().contains("shipping"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = r#"{"factories": 1, "machines": [], "shipping": [[0]], "jobs": [], "due": 3}"#;
        let err = Instance::from_json(text).unwrap_err();
        assert!(err.to_string().contains("due"), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Instance::from_json("{\n  \"factories\": 1,\n  oops").unwrap_err();
        match err {
            InstanceError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }
}
