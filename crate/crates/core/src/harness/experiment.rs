//! Runs every backend of a plan on generated instances and records the
//! outcome of each run.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::qubo::{compile, Compiled};
use crate::samplers::{
    solve_exhaustive, solve_remote, solve_sa, solve_schedule_oracle, RemoteConfig, SamplerConfig,
    DEFAULT_EXHAUSTIVE_LIMIT,
};
use crate::schedule::{decode, makespan, validate_schedule, Schedule};

use super::generator::{generate, GeneratorSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Sa,
    Exhaustive,
    Oracle,
    Remote,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::Sa,
        Backend::Exhaustive,
        Backend::Oracle,
        Backend::Remote,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Backend::Sa => "sa",
            Backend::Exhaustive => "exhaustive",
            Backend::Oracle => "oracle",
            Backend::Remote => "remote",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Backend::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| {
                format!("unknown backend `{s}` (expected sa, exhaustive, oracle or remote)")
            })
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub sampler: SamplerConfig,
    pub exhaustive_limit: usize,
    pub remote: Option<RemoteConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sampler: SamplerConfig::default(),
            exhaustive_limit: DEFAULT_EXHAUSTIVE_LIMIT,
            remote: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlanEntry {
    pub spec: GeneratorSpec,
    pub backends: Vec<Backend>,
    pub config: ExperimentConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    /// Registry variable count; 0 when the instance could not be built.
    pub instance_size: usize,
    pub backend: Backend,
    pub best_energy: Option<i64>,
    /// Present when the decoded schedule places every operation.
    pub makespan: Option<i64>,
    pub violations: Option<usize>,
    pub wall_time_ns: u64,
    pub reads: usize,
    pub seed: u64,
    pub error: Option<String>,
}

impl RunRecord {
    fn failed(
        instance_size: usize,
        backend: Backend,
        config: &ExperimentConfig,
        error: String,
    ) -> Self {
        Self {
            instance_size,
            backend,
            best_energy: None,
            makespan: None,
            violations: None,
            wall_time_ns: 1,
            reads: 0,
            seed: config.sampler.seed,
            error: Some(error),
        }
    }

    fn sort_key(&self) -> (usize, Backend, u64) {
        (self.instance_size, self.backend, self.seed)
    }
}

fn nanos(d: Duration) -> u64 {
    u64::try_from(d.as_nanos()).unwrap_or(u64::MAX).max(1)
}

struct Outcome {
    energy: i64,
    schedule: Schedule,
    wall_time: Duration,
    reads: usize,
}

fn solve(
    instance: &Instance,
    compiled: &Compiled,
    backend: Backend,
    config: &ExperimentConfig,
) -> Result<Outcome, String> {
    let qubo = &compiled.qubo;
    let from_set = |set: crate::samplers::SampleSet| -> Result<Outcome, String> {
        let best = set.best().ok_or("sampler returned no samples")?;
        Ok(Outcome {
            energy: best.energy,
            schedule: decode(&compiled.registry, &best.assignment).map_err(|e| e.to_string())?,
            wall_time: set.info.wall_time,
            reads: set.info.num_reads,
        })
    };
    match backend {
        Backend::Sa => from_set(solve_sa(qubo, &config.sampler).map_err(|e| e.to_string())?),
        Backend::Exhaustive => {
            from_set(solve_exhaustive(qubo, config.exhaustive_limit, 1).map_err(|e| e.to_string())?)
        }
        Backend::Remote => {
            let mut remote = config
                .remote
                .clone()
                .ok_or("remote backend has no endpoint configured")?;
            remote.num_reads = config.sampler.num_reads;
            from_set(solve_remote(qubo, &remote).map_err(|e| e.to_string())?)
        }
        Backend::Oracle => {
            let started = Instant::now();
            let solution =
                solve_schedule_oracle(instance, &compiled.registry).map_err(|e| e.to_string())?;
            let wall_time = started.elapsed();
            let bits = solution
                .schedule
                .encode(&compiled.registry)
                .expect("oracle schedules use registry keys");
            Ok(Outcome {
                energy: qubo.energy(&bits).expect("registry-sized assignment"),
                schedule: solution.schedule,
                wall_time,
                reads: 1,
            })
        }
    }
}

/// Solves an already compiled instance with one backend. Errors end up in
/// the record.
pub fn run_backend(
    instance: &Instance,
    compiled: &Compiled,
    backend: Backend,
    config: &ExperimentConfig,
) -> RunRecord {
    let size = compiled.registry.len();
    match solve(instance, compiled, backend, config) {
        Err(error) => RunRecord::failed(size, backend, config, error),
        Ok(outcome) => {
            let report = validate_schedule(instance, &outcome.schedule);
            RunRecord {
                instance_size: size,
                backend,
                best_energy: Some(outcome.energy),
                makespan: makespan(instance, &outcome.schedule).ok(),
                violations: Some(report.total()),
                wall_time_ns: nanos(outcome.wall_time),
                reads: outcome.reads,
                seed: config.sampler.seed,
                error: None,
            }
        }
    }
}

fn run_entry(entry: &PlanEntry) -> Vec<RunRecord> {
    let built = generate(&entry.spec)
        .map_err(|e| e.to_string())
        .and_then(|inst| compile(&inst).map(|c| (inst, c)).map_err(|e| e.to_string()));
    entry
        .backends
        .iter()
        .map(|&backend| match &built {
            Ok((inst, compiled)) => run_backend(inst, compiled, backend, &entry.config),
            Err(error) => RunRecord::failed(0, backend, &entry.config, error.clone()),
        })
        .collect()
}

/// Every (instance, backend) pair of the plan, sorted by size, backend and
/// seed. Instances run in parallel.
pub fn run_experiment(plan: &[PlanEntry]) -> Vec<RunRecord> {
    let mut records: Vec<RunRecord> = plan.par_iter().flat_map_iter(run_entry).collect();
    records.sort_by_key(RunRecord::sort_key);
    records
}

/// One plan entry per size with default generator settings; the seed drives
/// both the generator and the sampler.
pub fn bench_plan(
    sizes: &[usize],
    backends: &[Backend],
    seed: u64,
    config: &ExperimentConfig,
) -> Vec<PlanEntry> {
    sizes
        .iter()
        .map(|&size| PlanEntry {
            spec: GeneratorSpec::new(size, seed),
            backends: backends.to_vec(),
            config: ExperimentConfig {
                sampler: SamplerConfig {
                    seed,
                    ..config.sampler
                },
                ..config.clone()
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_names_round_trip() {
        for b in Backend::ALL {
            assert_eq!(b.name().parse::<Backend>(), Ok(b));
        }
        assert!("qpu".parse::<Backend>().is_err());
    }

    #[test]
    fn empty_plan() {
        assert!(run_experiment(&[]).is_empty());
    }

    #[test]
    fn small_instance_all_local_backends_agree() {
        let spec = GeneratorSpec {
            min_ops_per_job: 1,
            max_machines_per_op: 1,
            ptime: 1..=2,
            ..GeneratorSpec::new(12, 5)
        };
        let config = ExperimentConfig {
            sampler: SamplerConfig {
                num_sweeps: 50,
                ..Default::default()
            },
            ..Default::default()
        };
        let records = run_experiment(&[PlanEntry {
            spec,
            backends: vec![Backend::Oracle, Backend::Sa, Backend::Exhaustive],
            config,
        }]);
        assert_eq!(records.len(), 3);
        assert_eq!(
            records.iter().map(|r| r.backend).collect::<Vec<_>>(),
            vec![Backend::Sa, Backend::Exhaustive, Backend::Oracle]
        );
        for r in &records {
            assert_eq!(r.error, None);
            assert_eq!(r.violations, Some(0));
            assert!(r.wall_time_ns > 0);
        }
        assert_eq!(records[0].best_energy, records[1].best_energy);
        assert_eq!(records[0].best_energy, records[2].best_energy);
    }

    #[test]
    fn failures_are_recorded() {
        let records = run_experiment(&[
            PlanEntry {
                spec: GeneratorSpec::new(10, 1),
                backends: vec![Backend::Remote],
                config: ExperimentConfig::default(),
            },
            PlanEntry {
                spec: GeneratorSpec {
                    max_attempts: 1,
                    max_ops_per_job: 2,
                    ..GeneratorSpec::new(5000, 1)
                },
                backends: vec![Backend::Sa],
                config: ExperimentConfig::default(),
            },
        ]);
        assert_eq!(records.len(), 2);
        assert!(records
            .iter()
            .all(|r| r.error.is_some() && r.best_energy.is_none()));
    }
}
