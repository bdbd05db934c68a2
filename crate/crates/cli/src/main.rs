use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use rohyta::bench::{load_dir, run_bench, BenchConfig, BenchError};
use rohyta::instance::{
    serialize_instance, reference_robots, InstanceError, ScenarioSet,
};
use rohyta::model::{lp_model, ModelError};
use rohyta::schedule::{gantt_rows, write_gantt_csv, ScheduleError, ScheduleReport};
use rohyta::solvers::{SolverConfig, SolverError, SolverKind};
use rohyta::{
    assemble_matrices, build_travel_times, export_lp, generate_instance, generate_scenarios,
    load_instance, GeneratorParams, ProblemInstance, RobustConfig, UncertaintySet,
};

/// Exit status for an instance that fails to parse or validate.
const EXIT_INVALID: u8 = 3;
/// Exit status when no schedule satisfies the runtime limits.
const EXIT_INFEASIBLE: u8 = 4;
/// Exit status for bad solver, robust or sweep settings.
const EXIT_CONFIG: u8 = 5;
/// Exit status when the exhaustive search runs out of time.
const EXIT_TIME_LIMIT: u8 = 6;

#[derive(Parser)]
#[command(name = "rohyta", version, about = "Robust multi-robot hybrid-task allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance file and print its size.
    Validate { instance: PathBuf },
    /// Solve one instance and write a schedule report.
    Solve(SolveArgs),
    /// Sweep solvers, uncertainty sets, deviations and seeds over a directory of instances.
    Bench(BenchArgs),
    /// Write the MILP model of an instance in LP format.
    ExportLp(ExportArgs),
    /// Turn a schedule report into a Gantt table (CSV).
    Gantt {
        report: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Generate random instances or deviation scenarios.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Args)]
struct RobustArgs {
    /// Uncertainty set: none, box, convex_hull or ellipsoidal.
    #[arg(long, default_value = "none")]
    robust: UncertaintySet,
    /// Maximum delay as a fraction of the nominal cleaning time.
    #[arg(long, default_value_t = 0.10)]
    deviation: f64,
    /// Number of deviation scenarios to draw.
    #[arg(long, default_value_t = 10)]
    scenarios: usize,
    /// Seed for the scenario draws.
    #[arg(long, default_value_t = 0)]
    scenario_seed: u64,
    /// Use the scenarios stored in the instance file instead of drawing new ones.
    #[arg(long)]
    embedded_scenarios: bool,
    /// Ellipsoid radius.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
}

#[derive(Args)]
struct SolverArgs {
    /// Solver configuration file with optional [sa], [ga], [pso] and [exact] tables.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one setting, e.g. `--set sa.lk=50`. Repeatable.
    #[arg(long = "set", value_name = "TABLE.KEY=VALUE")]
    overrides: Vec<String>,
    /// Wall-clock budget per solve in seconds (the exhaustive search defaults to 600).
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// sa, ga, pso or exact.
    #[arg(long, default_value = "sa")]
    solver: SolverKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    robust: RobustArgs,
    #[command(flatten)]
    solver_args: SolverArgs,
    /// Schedule report (JSON) output path.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Gantt table (CSV) output path.
    #[arg(long)]
    gantt: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `*.toml` instances.
    dir: PathBuf,
    /// Comma-separated solvers.
    #[arg(long, value_delimiter = ',', default_value = "sa")]
    solvers: Vec<SolverKind>,
    /// Comma-separated robust sets compared against the deterministic run.
    #[arg(long, value_delimiter = ',', default_value = "box,convex_hull,ellipsoidal")]
    robust: Vec<UncertaintySet>,
    /// Comma-separated deviation fractions.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.10,0.15")]
    deviations: Vec<f64>,
    /// Number of seeds per cell, starting at `--first-seed`.
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    first_seed: u64,
    #[arg(long, default_value_t = 10)]
    scenarios: usize,
    #[arg(long, default_value_t = 0)]
    scenario_seed: u64,
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    #[command(flatten)]
    solver_args: SolverArgs,
    /// Output directory for runs.csv, aggregates.csv, summary.json and timings.csv.
    #[arg(short, long, default_value = "bench-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[command(flatten)]
    robust: RobustArgs,
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Random floor plans with the reference robot fleet.
    Instance {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        zones: usize,
        #[arg(long, default_value_t = 2)]
        types: usize,
        #[arg(long, default_value_t = 60)]
        width: usize,
        #[arg(long, default_value_t = 40)]
        height: usize,
        /// Meters per cell.
        #[arg(long, default_value_t = 0.2)]
        resolution: f64,
        #[arg(long, default_value_t = 8)]
        obstacles: usize,
        /// Number of instances; seeds run from `--seed` upward.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// Output file, or directory when `--count` is above 1.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Draw deviation scenarios and store them in a copy of the instance.
    Scenarios {
        instance: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0.10)]
        deviation: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InstanceError>().is_some() {
        return EXIT_INVALID;
    }
    if let Some(e) = err.downcast_ref::<SolverError>() {
        return match e {
            SolverError::Infeasible(_) => EXIT_INFEASIBLE,
            SolverError::TimeLimit(_) => EXIT_TIME_LIMIT,
            _ => EXIT_CONFIG,
        };
    }
    if let Some(e) = err.downcast_ref::<ScheduleError>() {
        return match e {
            ScheduleError::Infeasible(_) => EXIT_INFEASIBLE,
            _ => 1,
        };
    }
    if err.downcast_ref::<ModelError>().is_some() || err.downcast_ref::<BenchError>().is_some() {
        return EXIT_CONFIG;
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { instance } => validate(&instance),
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::ExportLp(args) => export(args),
        Command::Gantt { report, out } => gantt(&report, out.as_deref()),
        Command::Generate(cmd) => generate(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn validate(path: &Path) -> Result<()> {
    let inst = load_instance(path)?;
    println!(
        "{}: valid, {} zones, {} task types, {} robots, {} tasks including the depot",
        inst.name,
        inst.zones.len(),
        inst.task_types.len(),
        inst.n_robots(),
        inst.n_tasks()
    );
    Ok(())
}

fn robust_config(inst: &ProblemInstance, args: &RobustArgs) -> Result<(RobustConfig, f64)> {
    if args.robust == UncertaintySet::None {
        return Ok((RobustConfig::deterministic(), 0.0));
    }
    let (scenarios, deviation) = if args.embedded_scenarios {
        let s: ScenarioSet = inst.scenarios.clone().unwrap_or_default();
        (s, 0.0)
    } else {
        let s = generate_scenarios(inst, args.scenario_seed, args.scenarios, args.deviation)
            .map_err(|e| SolverError::Config(e.to_string()))?;
        (s, args.deviation)
    };
    let mut cfg = RobustConfig::new(args.robust, scenarios);
    cfg.omega = args.omega;
    Ok((cfg, deviation))
}

fn solver_config(args: &SolverArgs) -> Result<SolverConfig> {
    let mut cfg = match &args.config {
        Some(p) => SolverConfig::load(p)?,
        None => SolverConfig::default(),
    };
    for o in &args.overrides {
        cfg.set(o)?;
    }
    if let Some(t) = args.time_limit {
        cfg.sa.time_limit = Some(t);
        cfg.ga.time_limit = Some(t);
        cfg.pso.time_limit = Some(t);
        cfg.exact.time_limit = Some(t);
    }
    Ok(cfg)
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let cfg = solver_config(&args.solver_args)?;
    let (robust, deviation) = robust_config(&inst, &args.robust)?;
    let travel = build_travel_times(&inst, &inst.map).map_err(InstanceError::from)?;
    let mats = assemble_matrices(&inst, &travel, &robust)?;
    let started = Instant::now();
    let result = args.solver.solve(&inst, &mats, &cfg, args.seed)?;
    let wall = started.elapsed();

    let report = ScheduleReport::new(
        &inst,
        &result.schedule,
        Some(&result.vector),
        args.solver.as_str(),
        args.seed,
        robust.kind.as_str(),
        deviation,
    );
    if let Some(p) = &args.report {
        fs::write(p, report.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = &args.gantt {
        let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        write_gantt_csv(&gantt_rows(&report), f)?;
    }
    println!("makespan: {} s", result.makespan);
    println!("vector: {}", result.vector);
    println!("wall time: {:.3} s", wall.as_secs_f64());
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let (instances, skipped) = load_dir(&args.dir)?;
    for s in &skipped {
        eprintln!("warning: skipping {}: {}", s.file, s.error);
    }
    if instances.is_empty() {
        bail!(BenchError::Config(format!(
            "no loadable instances in {}",
            args.dir.display()
        )));
    }
    let cfg = BenchConfig {
        solvers: args.solvers,
        uncertainty: args
            .robust
            .into_iter()
            .filter(|k| *k != UncertaintySet::None)
            .collect(),
        deviations: args.deviations,
        seeds: (args.first_seed..args.first_seed + args.seeds).collect(),
        n_scenarios: args.scenarios,
        scenario_seed: args.scenario_seed,
        omega: args.omega,
        solver: solver_config(&args.solver_args)?,
    };
    let mut report = run_bench(&instances, &cfg)?;
    report.skipped = skipped;
    report.write_dir(&args.out, &cfg)?;
    println!(
        "{} runs over {} instances, {} failed; results in {}",
        report.runs.len(),
        instances.len(),
        report.failures(),
        args.out.display()
    );
    for s in report.ratio_by_set() {
        if s.uncertainty == UncertaintySet::None.as_str() {
            continue;
        }
        if let Some(r) = s.mean_robust_ratio {
            println!(
                "{} {} {:.0}%: mean r_ro = {:.4}",
                s.solver,
                s.uncertainty,
                s.deviation * 100.0,
                r
            );
        }
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let (robust, _) = robust_config(&inst, &args.robust)?;
    let travel = build_travel_times(&inst, &inst.map).map_err(InstanceError::from)?;
    let mats = assemble_matrices(&inst, &travel, &robust)?;
    let text = export_lp(&mats, &inst);
    fs::write(&args.out, &text).with_context(|| format!("writing {}", args.out.display()))?;
    let model = lp_model(&mats);
    println!(
        "{}: {} variables ({} binary), {} constraints",
        args.out.display(),
        model.n_variables(),
        model.binaries.len(),
        model.rows.len()
    );
    Ok(())
}

fn gantt(report: &Path, out: Option<&Path>) -> Result<()> {
    let text =
        fs::read_to_string(report).with_context(|| format!("reading {}", report.display()))?;
    let report = ScheduleReport::from_json(&text)?;
    let rows = gantt_rows(&report);
    match out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            write_gantt_csv(&rows, f)?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_gantt_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn generate(cmd: GenerateCommand) -> Result<()> {
    match cmd {
        GenerateCommand::Instance {
            seed,
            zones,
            types,
            width,
            height,
            resolution,
            obstacles,
            count,
            out,
        } => {
            let params = GeneratorParams {
                width,
                height,
                resolution,
                obstacles,
                ..GeneratorParams::default()
            };
            let robots = reference_robots();
            if count > 1 {
                fs::create_dir_all(&out)
                    .with_context(|| format!("creating {}", out.display()))?;
            }
            for s in seed..seed + count {
                let mut inst = generate_instance(s, zones, types, &robots, &params)?;
                let path = if count > 1 {
                    out.join(format!("gen-{zones}z-{s}.toml"))
                } else {
                    out.clone()
                };
                inst.name = path
                    .file_stem()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or(inst.name);
                fs::write(&path, serialize_instance(&inst))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("{}: {} zones, {} tasks", path.display(), zones, inst.n_tasks());
            }
        }
        GenerateCommand::Scenarios {
            instance,
            seed,
            count,
            deviation,
            out,
        } => {
            let mut inst = load_instance(&instance)?;
            inst.scenarios = Some(generate_scenarios(&inst, seed, count, deviation)?);
            fs::write(&out, serialize_instance(&inst))
                .with_context(|| format!("writing {}", out.display()))?;
            println!("{}: {count} scenarios at deviation {deviation}", out.display());
        }
    }
    Ok(())
}
