//! Command line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 when a
//! validation fails, 2 on usage errors (bad flags, unreadable or malformed
//! input files).

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};

use dfjsp::fixtures::{self, FIRST_OP_KEY, SECOND_OP_KEY};
use dfjsp::harness::{
    bench_plan, generate, plot_series, report_with, run_experiment, Backend, ExperimentConfig,
    Format, GeneratorSpec, Timing,
};
use dfjsp::qubo::{build_qubo, calibrate_weights, Compiled, VariableRegistry, Weights};
use dfjsp::samplers::{
    solve_exhaustive, solve_remote, solve_sa, solve_schedule_oracle, RemoteConfig, SampleSet,
    SamplerConfig, DEFAULT_EXHAUSTIVE_LIMIT,
};
use dfjsp::schedule::{decode, makespan, render_gantt, validate_schedule, Schedule};
use dfjsp::Instance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "dfjsp",
    version,
    about = "Distributed flexible job shop scheduling as a QUBO"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BackendArg {
    Sa,
    Exhaustive,
    Oracle,
    Remote,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Sa => Backend::Sa,
            BackendArg::Exhaustive => Backend::Exhaustive,
            BackendArg::Oracle => Backend::Oracle,
            BackendArg::Remote => Backend::Remote,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance with about N variables
    Generate {
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2)]
        jobs: usize,
        #[arg(long, default_value_t = 2)]
        min_ops: usize,
        #[arg(long, default_value_t = 2)]
        max_machines_per_op: usize,
        #[arg(long, default_value_t = 2)]
        factories: usize,
        #[arg(long, default_value_t = 2)]
        machines_per_factory: usize,
    },
    /// Write the QUBO of an instance and print registry statistics
    Compile {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Uniform penalty weight instead of the calibrated one
        #[arg(long)]
        weight: Option<i64>,
        /// Also write the variable index as `index job op machine start`
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Solve an instance and print the best schedule
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "sa")]
        backend: BackendArg,
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        #[arg(long, default_value_t = 3)]
        sweeps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        weight: Option<i64>,
        #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_LIMIT)]
        limit: usize,
        /// TOML file with endpoint, token and timeouts; defaults to the
        /// ANNEAL_ENDPOINT and ANNEAL_TOKEN environment variables
        #[arg(long)]
        remote_config: Option<PathBuf>,
        #[arg(long)]
        chain_strength: Option<f64>,
        /// Write the schedule export here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gantt: bool,
    },
    /// Check an instance and a schedule export against each other
    Validate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        gantt: bool,
    },
    /// Generate, solve and report a size sweep
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "sa")]
        backends: Vec<BackendArg>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        reads: usize,
        #[arg(long, default_value_t = 3)]
        sweeps: usize,
        /// `.json` writes JSON, anything else CSV
        #[arg(long)]
        report: PathBuf,
        /// Include measured wall times and trend fits (not reproducible)
        #[arg(long)]
        timings: bool,
        #[arg(long)]
        remote_config: Option<PathBuf>,
    },
    /// Energies of the two-operation worked example
    #[command(name = "fixture-4-4")]
    Fixture44,
}

enum Failure {
    Usage(anyhow::Error),
    Invalid(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<i32, Failure>;

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let instance = Instance::load(path).map_err(|e| Failure::Usage(e.into()))?;
    let report = instance.validate();
    if !report.is_valid() {
        return Err(Failure::Invalid(anyhow!(
            "{}: invalid instance\n{report}",
            path.display()
        )));
    }
    Ok(instance)
}

fn compile_with(instance: &Instance, weight: Option<i64>) -> Result<Compiled, Failure> {
    let registry = VariableRegistry::build(instance).map_err(|e| Failure::Invalid(e.into()))?;
    let weights = match weight {
        Some(w) => Weights::uniform(w).map_err(|e| Failure::Usage(e.into()))?,
        None => calibrate_weights(&registry),
    };
    let qubo = build_qubo(instance, &registry, weights);
    Ok(Compiled {
        registry,
        weights,
        qubo,
    })
}

fn remote_config(path: Option<&Path>) -> Result<RemoteConfig, Failure> {
    let config = match path {
        Some(p) => RemoteConfig::from_file(p),
        None => RemoteConfig::from_env(),
    };
    config.map_err(|e| Failure::Usage(e.into()))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(Failure::Usage)
}

fn cmd_generate(spec: GeneratorSpec, out: &Path, stdout: &mut dyn Write) -> Outcome {
    let instance = generate(&spec).map_err(|e| Failure::Usage(e.into()))?;
    let size = VariableRegistry::build(&instance)
        .map_err(|e| Failure::Invalid(e.into()))?
        .len();
    instance.save(out).map_err(|e| Failure::Usage(e.into()))?;
    writeln!(stdout, "wrote {} ({size} variables)", out.display()).ok();
    Ok(EXIT_OK)
}

fn cmd_compile(
    instance: &Path,
    out: &Path,
    weight: Option<i64>,
    registry_out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Outcome {
    let instance = load_instance(instance)?;
    let c = compile_with(&instance, weight)?;
    write_file(out, &c.qubo.to_export())?;
    if let Some(path) = registry_out {
        let mut text = String::from("index job op machine start\n");
        for (i, k) in c.registry.keys().iter().enumerate() {
            text.push_str(&format!(
                "{i} {} {} {} {}\n",
                k.job, k.op, k.machine, k.start
            ));
        }
        write_file(path, &text)?;
    }
    let w = c.weights;
    writeln!(stdout, "variables {}", c.registry.len()).ok();
    writeln!(stdout, "t_max {}", c.registry.t_max()).ok();
    writeln!(stdout, "weights {} {} {}", w.alpha, w.beta, w.gamma).ok();
    writeln!(stdout, "linear_terms {}", c.qubo.linear().len()).ok();
    writeln!(stdout, "quadratic_terms {}", c.qubo.quadratic().len()).ok();
    writeln!(stdout, "offset {}", c.qubo.offset()).ok();
    Ok(EXIT_OK)
}

fn print_schedule(
    instance: &Instance,
    schedule: &Schedule,
    out: Option<&Path>,
    gantt: bool,
    stdout: &mut dyn Write,
) -> Outcome {
    let report = validate_schedule(instance, schedule);
    match makespan(instance, schedule) {
        Ok(m) => writeln!(stdout, "makespan {m}").ok(),
        Err(_) => writeln!(stdout, "makespan incomplete").ok(),
    };
    writeln!(stdout, "violations {}", report.total()).ok();
    if !report.is_valid() {
        write!(stdout, "{report}").ok();
    }
    let export = schedule.to_export(instance);
    match out {
        Some(path) => write_file(path, &export)?,
        None => {
            write!(stdout, "{export}").ok();
        }
    }
    if gantt {
        write!(stdout, "{}", render_gantt(instance, schedule)).ok();
    }
    Ok(if report.is_valid() && schedule.is_complete() {
        EXIT_OK
    } else {
        EXIT_INVALID
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    instance: &Path,
    backend: Backend,
    config: SamplerConfig,
    weight: Option<i64>,
    limit: usize,
    remote: Option<&Path>,
    chain_strength: Option<f64>,
    out: Option<&Path>,
    gantt: bool,
    stdout: &mut dyn Write,
) -> Outcome {
    let instance = load_instance(instance)?;
    let c = compile_with(&instance, weight)?;
    writeln!(stdout, "backend {backend}").ok();
    writeln!(stdout, "variables {}", c.registry.len()).ok();
    let invalid = |e: dfjsp::samplers::SamplerError| Failure::Invalid(e.into());
    let registry = &c.registry;
    let best = |set: SampleSet, stdout: &mut dyn Write| -> Result<Schedule, Failure> {
        let best = set
            .best()
            .ok_or_else(|| Failure::Invalid(anyhow!("no samples returned")))?;
        writeln!(stdout, "best_energy {}", best.energy).ok();
        writeln!(
            stdout,
            "occurrences {} of {}",
            best.occurrences,
            set.total_occurrences()
        )
        .ok();
        decode(registry, &best.assignment).map_err(|e| Failure::Invalid(e.into()))
    };
    let schedule = match backend {
        Backend::Sa => best(solve_sa(&c.qubo, &config).map_err(invalid)?, stdout)?,
        Backend::Exhaustive => best(
            solve_exhaustive(&c.qubo, limit, 1).map_err(invalid)?,
            stdout,
        )?,
        Backend::Remote => {
            let mut remote = remote_config(remote)?;
            remote.num_reads = config.num_reads;
            if chain_strength.is_some() {
                remote.chain_strength = chain_strength;
            }
            best(solve_remote(&c.qubo, &remote).map_err(invalid)?, stdout)?
        }
        Backend::Oracle => {
            let solution = solve_schedule_oracle(&instance, &c.registry).map_err(invalid)?;
            let bits = solution
                .schedule
                .encode(&c.registry)
                .expect("oracle uses registry keys");
            let energy = c.qubo.energy(&bits).expect("registry-sized assignment");
            writeln!(stdout, "best_energy {energy}").ok();
            solution.schedule
        }
    };
    print_schedule(&instance, &schedule, out, gantt, stdout)
}

fn cmd_validate(instance: &Path, schedule: &Path, gantt: bool, stdout: &mut dyn Write) -> Outcome {
    let instance = load_instance(instance)?;
    let text = fs::read_to_string(schedule)
        .with_context(|| format!("cannot read {}", schedule.display()))?;
    let schedule = Schedule::from_export(&instance, &text)
        .map_err(|e| Failure::Usage(anyhow!("{}: {e}", schedule.display())))?;
    let report = validate_schedule(&instance, &schedule);
    if !schedule.is_complete() {
        writeln!(
            stdout,
            "schedule does not place every operation exactly once"
        )
        .ok();
    }
    write!(stdout, "{report}").ok();
    if let Ok(m) = makespan(&instance, &schedule) {
        writeln!(stdout, "makespan {m}").ok();
    }
    if gantt {
        write!(stdout, "{}", render_gantt(&instance, &schedule)).ok();
    }
    Ok(if report.is_valid() && schedule.is_complete() {
        EXIT_OK
    } else {
        EXIT_INVALID
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    sizes: &[usize],
    backends: &[Backend],
    seed: u64,
    sampler: SamplerConfig,
    report: &Path,
    timings: bool,
    remote: Option<&Path>,
    stdout: &mut dyn Write,
) -> Outcome {
    if sizes.contains(&0) {
        return Err(Failure::Usage(anyhow!("sizes must be at least 1")));
    }
    let config = ExperimentConfig {
        sampler,
        remote: if backends.contains(&Backend::Remote) {
            Some(remote_config(remote)?)
        } else {
            None
        },
        ..Default::default()
    };
    let records = run_experiment(&bench_plan(sizes, backends, seed, &config));
    let format = match report.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    };
    let timing = if timings {
        Timing::Measured
    } else {
        Timing::Redacted
    };
    write_file(report, &report_with(&records, format, timing))?;
    let stem = report.with_extension("");
    for series in plot_series(&records, timing) {
        let path = PathBuf::from(format!("{}.{}", stem.display(), series.file_suffix()));
        write_file(&path, &series.to_dat())?;
    }
    let mut status = EXIT_OK;
    for r in &records {
        match (&r.error, r.violations) {
            (Some(e), _) => {
                status = EXIT_INVALID;
                writeln!(stdout, "size {} {}: error: {e}", r.instance_size, r.backend).ok();
            }
            (None, v) => {
                if v != Some(0) {
                    status = EXIT_INVALID;
                }
                writeln!(
                    stdout,
                    "size {} {}: energy {} violations {}",
                    r.instance_size,
                    r.backend,
                    r.best_energy.map_or("-".into(), |e| e.to_string()),
                    v.map_or("-".into(), |v| v.to_string())
                )
                .ok();
            }
        }
    }
    writeln!(stdout, "wrote {}", report.display()).ok();
    Ok(status)
}

fn cmd_fixture(stdout: &mut dyn Write) -> Outcome {
    let instance = fixtures::worked_example();
    let registry = VariableRegistry::build(&instance).map_err(|e| Failure::Invalid(e.into()))?;
    let both = registry
        .assignment_of([&FIRST_OP_KEY, &SECOND_OP_KEY])
        .expect("fixture keys survive pruning");
    let first = registry
        .assignment_of([&FIRST_OP_KEY])
        .expect("fixture key survives pruning");
    let unit = build_qubo(
        &instance,
        &registry,
        Weights::new(0, 1, 0).expect("nonnegative"),
    );
    let calibrated_weights = calibrate_weights(&registry);
    let calibrated = build_qubo(&instance, &registry, calibrated_weights);
    let energies = [
        ("both operations scheduled, beta = 1", unit.energy(&both)),
        (
            "second operation unscheduled, beta = 1",
            unit.energy(&first),
        ),
        (
            "second operation unscheduled, beta = t_max",
            calibrated.energy(&first),
        ),
    ];
    writeln!(stdout, "t_max {}", registry.t_max()).ok();
    for (label, energy) in energies {
        let energy = energy.map_err(|e| Failure::Invalid(e.into()))?;
        writeln!(stdout, "{label}: H = {energy}").ok();
    }
    Ok(EXIT_OK)
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Outcome {
    match cli.command {
        Command::Generate {
            target,
            seed,
            out,
            jobs,
            min_ops,
            max_machines_per_op,
            factories,
            machines_per_factory,
        } => {
            let spec = GeneratorSpec {
                jobs,
                min_ops_per_job: min_ops,
                max_machines_per_op,
                factories,
                machines_per_factory,
                ..GeneratorSpec::new(target, seed)
            };
            cmd_generate(spec, &out, stdout)
        }
        Command::Compile {
            instance,
            out,
            weight,
            registry,
        } => cmd_compile(&instance, &out, weight, registry.as_deref(), stdout),
        Command::Solve {
            instance,
            backend,
            reads,
            sweeps,
            seed,
            weight,
            limit,
            remote_config,
            chain_strength,
            out,
            gantt,
        } => {
            let config = SamplerConfig {
                num_reads: reads,
                num_sweeps: sweeps,
                seed,
                beta_range: None,
            };
            config.validate().map_err(|e| Failure::Usage(e.into()))?;
            cmd_solve(
                &instance,
                backend.into(),
                config,
                weight,
                limit,
                remote_config.as_deref(),
                chain_strength,
                out.as_deref(),
                gantt,
                stdout,
            )
        }
        Command::Validate {
            instance,
            schedule,
            gantt,
        } => cmd_validate(&instance, &schedule, gantt, stdout),
        Command::Bench {
            sizes,
            backends,
            seed,
            reads,
            sweeps,
            report,
            timings,
            remote_config,
        } => {
            let sampler = SamplerConfig {
                num_reads: reads,
                num_sweeps: sweeps,
                seed,
                beta_range: None,
            };
            sampler.validate().map_err(|e| Failure::Usage(e.into()))?;
            let backends: Vec<Backend> = backends.into_iter().map(Backend::from).collect();
            cmd_bench(
                &sizes,
                &backends,
                seed,
                sampler,
                &report,
                timings,
                remote_config.as_deref(),
                stdout,
            )
        }
        Command::Fixture44 => cmd_fixture(stdout),
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Results go to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                write!(stderr, "{rendered}").ok();
            } else {
                write!(stdout, "{rendered}").ok();
            }
            return code;
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            writeln!(stderr, "error: {e:#}").ok();
            EXIT_USAGE
        }
        Err(Failure::Invalid(e)) => {
            writeln!(stderr, "error: {e:#}").ok();
            EXIT_INVALID
        }
    }
}
