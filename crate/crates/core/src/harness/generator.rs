//! Seeded random instances sized by their registry variable count.
//!
//! Machines are numbered factory by factory. Shipping times are drawn once
//! per factory pair and are zero inside a factory. Every operation draws
//! between one and `max_machines_per_op` eligible machines; when it has
//! several, they come from pairwise distinct factories as long as factories
//! remain. Processing times are drawn per (operation, machine).
//!
//! Starting from `min_ops_per_job` operations per job, the instance grows
//! until the registry reaches `target - target/10`. Each step either appends
//! an operation to the shortest job (lowest id on ties) or gives a random
//! operation one more eligible machine. A step that overshoots
//! `target + target/10` is undone; after `MAX_REJECTED_STEPS` undone steps
//! in a row the attempt is discarded and a fresh one is drawn from the next
//! ChaCha8 stream.

use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, Job, Machine, Operation, ShippingMatrix};
use crate::qubo::VariableRegistry;

const MAX_REJECTED_STEPS: u32 = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeneratorError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("no instance within [{low}, {high}] variables after {attempts} attempts (closest: {closest})")]
    Unreachable {
        low: usize,
        high: usize,
        attempts: u32,
        closest: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub target_variables: usize,
    pub jobs: usize,
    pub min_ops_per_job: usize,
    pub max_machines_per_op: usize,
    pub factories: usize,
    pub machines_per_factory: usize,
    pub ptime: RangeInclusive<u32>,
    pub shipping: RangeInclusive<u32>,
    pub seed: u64,
    pub max_attempts: u32,
    /// Growth stops once any job has this many operations.
    pub max_ops_per_job: usize,
}

impl GeneratorSpec {
    pub fn new(target_variables: usize, seed: u64) -> Self {
        Self {
            target_variables,
            jobs: 2,
            min_ops_per_job: 2,
            max_machines_per_op: 2,
            factories: 2,
            machines_per_factory: 2,
            ptime: 1..=3,
            shipping: 1..=3,
            seed,
            max_attempts: 64,
            max_ops_per_job: 64,
        }
    }

    /// Accepted registry sizes.
    pub fn tolerance(&self) -> RangeInclusive<usize> {
        let slack = self.target_variables / 10;
        self.target_variables - slack..=self.target_variables + slack
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let bad = |msg: &str| Err(GeneratorError::InvalidSpec(msg.into()));
        if self.target_variables == 0 {
            return bad("target must be at least 1");
        }
        if self.jobs == 0 || self.min_ops_per_job == 0 {
            return bad("need at least one job with one operation");
        }
        if self.max_ops_per_job < self.min_ops_per_job {
            return bad("max_ops_per_job is below min_ops_per_job");
        }
        if self.factories == 0 || self.machines_per_factory == 0 {
            return bad("need at least one factory with one machine");
        }
        if self.max_machines_per_op == 0 {
            return bad("max_machines_per_op must be at least 1");
        }
        if self.ptime.is_empty() || *self.ptime.start() == 0 {
            return bad("processing-time range must be nonempty and start at 1 or more");
        }
        if self.shipping.is_empty() {
            return bad("shipping range must be nonempty");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        Ok(())
    }

    fn num_machines(&self) -> usize {
        self.factories * self.machines_per_factory
    }
}

struct Draw<'a> {
    spec: &'a GeneratorSpec,
    rng: ChaCha8Rng,
    machines: Vec<Machine>,
}

impl Draw<'_> {
    #[allow(clippy::needless_range_loop)]
    fn shipping(&mut self) -> ShippingMatrix {
        let f = self.spec.factories;
        let mut rows = vec![vec![0u32; f]; f];
        for a in 0..f {
            for b in a + 1..f {
                let d = self.rng.random_range(self.spec.shipping.clone());
                rows[a][b] = d;
                rows[b][a] = d;
            }
        }
        ShippingMatrix(rows)
    }

    /// A machine not yet in `chosen`, from an unused factory when possible.
    fn extra_machine(&mut self, chosen: &[usize]) -> usize {
        let used: Vec<usize> = chosen.iter().map(|&m| self.machines[m].factory).collect();
        let fresh: Vec<usize> = (0..self.machines.len())
            .filter(|m| !chosen.contains(m) && !used.contains(&self.machines[*m].factory))
            .collect();
        let pool: Vec<usize> = if fresh.is_empty() {
            (0..self.machines.len())
                .filter(|m| !chosen.contains(m))
                .collect()
        } else {
            fresh
        };
        pool[self.rng.random_range(0..pool.len())]
    }

    fn operation(&mut self) -> Operation {
        let spec = self.spec;
        let count = self
            .rng
            .random_range(1..=spec.max_machines_per_op.min(self.machines.len()));
        let mut chosen: Vec<usize> = Vec::with_capacity(count);
        while chosen.len() < count {
            let m = self.extra_machine(&chosen);
            chosen.push(m);
        }
        chosen.sort_unstable();
        let options: Vec<(usize, u32)> = chosen
            .into_iter()
            .map(|m| (m, self.rng.random_range(spec.ptime.clone())))
            .collect();
        Operation::new(options)
    }

    fn machine_limit(&self) -> usize {
        self.spec.max_machines_per_op.min(self.machines.len())
    }

    /// Applies one growth step; `false` if no step is possible.
    fn grow(&mut self, instance: &mut Instance) -> bool {
        let limit = self.machine_limit();
        let widenable: Vec<(usize, usize)> = instance
            .operations()
            .filter(|(_, _, op)| op.machine_options.len() < limit)
            .map(|(j, o, _)| (j, o))
            .collect();
        let shortest = instance
            .jobs
            .iter()
            .min_by_key(|j| (j.operations.len(), j.id))
            .expect("at least one job")
            .id;
        let can_append = instance.jobs[shortest].operations.len() < self.spec.max_ops_per_job;
        let widen = match (can_append, widenable.is_empty()) {
            (false, true) => return false,
            (true, true) => false,
            (false, false) => true,
            (true, false) => self.rng.random_bool(0.5),
        };
        if widen {
            let (job, op) = widenable[self.rng.random_range(0..widenable.len())];
            let chosen: Vec<usize> = instance.jobs[job].operations[op]
                .machine_options
                .iter()
                .map(|o| o.machine)
                .collect();
            let machine = self.extra_machine(&chosen);
            let ptime = self.rng.random_range(self.spec.ptime.clone());
            let mut options: Vec<(usize, u32)> = chosen
                .iter()
                .map(|&m| (m, instance.ptime(job, op, m).expect("eligible")))
                .chain([(machine, ptime)])
                .collect();
            options.sort_unstable();
            instance.jobs[job].operations[op] = Operation::new(options);
        } else {
            let op = self.operation();
            instance.jobs[shortest].operations.push(op);
        }
        true
    }
}

fn registry_size(instance: &Instance) -> usize {
    VariableRegistry::build(instance)
        .expect("computed horizon always admits a window")
        .len()
}

/// One attempt: `Ok` within tolerance, `Err(size)` otherwise.
fn attempt(spec: &GeneratorSpec, stream: u64) -> Result<Instance, usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let machines: Vec<Machine> = (0..spec.num_machines())
        .map(|id| Machine {
            id,
            factory: id / spec.machines_per_factory,
        })
        .collect();
    let mut draw = Draw {
        spec,
        rng,
        machines,
    };
    let shipping = draw.shipping();
    let jobs: Vec<Job> = (0..spec.jobs)
        .map(|id| Job {
            id,
            operations: (0..spec.min_ops_per_job)
                .map(|_| draw.operation())
                .collect(),
        })
        .collect();
    let mut instance = Instance {
        factories: spec.factories,
        machines: draw.machines.clone(),
        shipping,
        jobs,
    };

    let range = spec.tolerance();
    let mut size = registry_size(&instance);
    let mut rejected = 0;
    while size < *range.start() {
        let before = instance.clone();
        if !draw.grow(&mut instance) {
            return Err(size);
        }
        let grown = registry_size(&instance);
        if grown > *range.end() {
            instance = before;
            rejected += 1;
            if rejected == MAX_REJECTED_STEPS {
                return Err(grown);
            }
        } else {
            size = grown;
            rejected = 0;
        }
    }
    if size > *range.end() {
        return Err(size);
    }
    Ok(instance)
}

/// Deterministic in `spec`; the result's registry size lies in
/// [`GeneratorSpec::tolerance`].
pub fn generate(spec: &GeneratorSpec) -> Result<Instance, GeneratorError> {
    spec.validate()?;
    let target = spec.target_variables;
    let mut closest = usize::MAX;
    for stream in 0..u64::from(spec.max_attempts) {
        match attempt(spec, stream) {
            Ok(instance) => return Ok(instance),
            Err(size) => {
                if size.abs_diff(target) < closest.abs_diff(target) {
                    closest = size;
                }
            }
        }
    }
    let range = spec.tolerance();
    Err(GeneratorError::Unreachable {
        low: *range.start(),
        high: *range.end(),
        attempts: spec.max_attempts,
        closest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_fifty_is_within_tolerance() {
        let inst = generate(&GeneratorSpec::new(50, 1)).unwrap();
        assert!(inst.validate().is_valid());
        let n = registry_size(&inst);
        assert!((45..=55).contains(&n), "{n}");
        assert!(inst.jobs.iter().all(|j| j.operations.len() >= 2));
    }

    #[test]
    fn single_variable_override() {
        let spec = GeneratorSpec {
            jobs: 1,
            min_ops_per_job: 1,
            max_ops_per_job: 1,
            factories: 1,
            machines_per_factory: 1,
            max_machines_per_op: 1,
            ptime: 1..=1,
            ..GeneratorSpec::new(1, 0)
        };
        let inst = generate(&spec).unwrap();
        assert_eq!(registry_size(&inst), 1);
    }

    #[test]
    fn deterministic() {
        let spec = GeneratorSpec::new(100, 7);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
        assert_ne!(
            generate(&spec).unwrap(),
            generate(&GeneratorSpec { seed: 8, ..spec }).unwrap()
        );
    }

    #[test]
    fn multi_machine_operations_span_factories() {
        let inst = generate(&GeneratorSpec::new(150, 3)).unwrap();
        for (_, _, op) in inst.operations() {
            let mut factories: Vec<usize> = op
                .machine_options
                .iter()
                .map(|o| inst.machine(o.machine).factory)
                .collect();
            factories.sort_unstable();
            factories.dedup();
            assert_eq!(factories.len(), op.machine_options.len());
        }
    }

    #[test]
    fn unreachable_target() {
        let spec = GeneratorSpec {
            max_ops_per_job: 2,
            max_attempts: 3,
            ..GeneratorSpec::new(10_000, 0)
        };
        assert!(matches!(
            generate(&spec),
            Err(GeneratorError::Unreachable { attempts: 3, .. })
        ));
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate(&GeneratorSpec::new(0, 0)).is_err());
        let spec = GeneratorSpec {
            ptime: 0..=2,
            ..GeneratorSpec::new(10, 0)
        };
        assert!(matches!(
            generate(&spec),
            Err(GeneratorError::InvalidSpec(_))
        ));
    }
}
