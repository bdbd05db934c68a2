//! Sweeps solvers over instances, uncertainty sets, deviation levels and
//! seeds, and writes the results as CSV and JSON.
//!
//! `runs.csv`, `aggregates.csv` and `summary.json` hold only values that
//! follow from the inputs and seeds, so repeated sweeps produce identical
//! files. Wall-clock times go to `timings.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::{build_travel_times, TravelTimes};
use crate::instance::{generate_scenarios, load_instance, ProblemInstance};
use crate::model::{assemble_matrices, RobustConfig, UncertaintySet};
use crate::schedule::{check_feasibility, robust_ratio};
use crate::solvers::{SolverConfig, SolverKind};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid sweep: {0}")]
    Config(String),
    #[error("cannot write {path}: {message}")]
    Output { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub solvers: Vec<SolverKind>,
    /// Robust sets to compare against the deterministic baseline.
    pub uncertainty: Vec<UncertaintySet>,
    /// Maximum delay as a fraction of the nominal cleaning time.
    pub deviations: Vec<f64>,
    pub seeds: Vec<u64>,
    pub n_scenarios: usize,
    pub scenario_seed: u64,
    /// Ellipsoid radius.
    pub omega: f64,
    pub solver: SolverConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            solvers: vec![SolverKind::Sa],
            uncertainty: UncertaintySet::ROBUST.to_vec(),
            deviations: vec![0.05, 0.10, 0.15],
            seeds: (0..10).collect(),
            n_scenarios: 10,
            scenario_seed: 0,
            omega: 1.0,
            solver: SolverConfig::default(),
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.solvers.is_empty() || self.seeds.is_empty() {
            return Err(BenchError::Config("need at least one solver and one seed".into()));
        }
        if let Some(d) = self.deviations.iter().find(|d| !(d.is_finite() && **d >= 0.0)) {
            return Err(BenchError::Config(format!(
                "deviations must be nonnegative fractions, got {d}"
            )));
        }
        if self.uncertainty.contains(&UncertaintySet::None) {
            return Err(BenchError::Config(
                "the deterministic baseline always runs; list only robust sets".into(),
            ));
        }
        if !self.uncertainty.is_empty() && (self.deviations.is_empty() || self.n_scenarios == 0) {
            return Err(BenchError::Config(
                "robust sets need at least one deviation and one scenario".into(),
            ));
        }
        Ok(())
    }
}

/// One solver run. Failed runs keep their error and have no makespan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub uncertainty: String,
    pub deviation: f64,
    pub makespan: Option<f64>,
    /// Whether the returned schedule passes every feasibility check.
    pub feasible: Option<bool>,
    /// The returned solution vector; decoding it reproduces `makespan`.
    pub vector: Option<String>,
    /// Deterministic makespan of the same instance, solver and seed.
    pub baseline: Option<f64>,
    pub robust_ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub instance: String,
    pub solver: String,
    pub seed: u64,
    pub uncertainty: String,
    pub deviation: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Statistics over seeds for one (instance, solver, set, deviation) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instance: String,
    pub solver: String,
    pub uncertainty: String,
    pub deviation: f64,
    pub runs: usize,
    pub failures: usize,
    pub makespan: Option<Stats>,
    pub robust_ratio: Option<Stats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<Aggregate>,
    /// Instance files that could not be loaded.
    pub skipped: Vec<Skipped>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub file: String,
    pub error: String,
}

/// Loads every `*.toml` instance in `dir`, in file-name order. Files that fail
/// to load are returned separately.
pub fn load_dir(dir: &Path) -> Result<(Vec<ProblemInstance>, Vec<Skipped>), BenchError> {
    let entries = fs::read_dir(dir).map_err(|e| BenchError::Config(format!(
        "cannot read instance directory {}: {e}",
        dir.display()
    )))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let mut instances = Vec::new();
    let mut skipped = Vec::new();
    for p in paths {
        match load_instance(&p) {
            Ok(inst) => instances.push(inst),
            Err(e) => skipped.push(Skipped {
                file: p.file_name().unwrap_or_default().to_string_lossy().into_owned(),
                error: e.to_string(),
            }),
        }
    }
    Ok((instances, skipped))
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a BenchConfig,
    instances: Vec<&'a str>,
    total_runs: usize,
    failures: usize,
    skipped: &'a [Skipped],
    ratio_by_set: Vec<SetSummary>,
    aggregates: &'a [Aggregate],
}

/// Mean robust ratio over all instances and seeds of one solver, set and
/// deviation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetSummary {
    pub solver: String,
    pub uncertainty: String,
    pub deviation: f64,
    pub runs: usize,
    pub mean_robust_ratio: Option<f64>,
}

struct Outcome {
    makespan: f64,
    feasible: bool,
    vector: String,
    wall: f64,
}

struct Job<'a> {
    inst: &'a ProblemInstance,
    travel: Result<&'a TravelTimes, String>,
    solver: SolverKind,
    seed: u64,
}

fn run_job(job: &Job<'_>, cfg: &BenchConfig) -> Vec<(RunRecord, Timing)> {
    let mut out = Vec::new();
    let record = |set: UncertaintySet, dev: f64, res: Result<Outcome, String>, baseline: Option<f64>| {
        let (makespan, feasible, vector, wall, error) = match res {
            Ok(o) => (Some(o.makespan), Some(o.feasible), Some(o.vector), o.wall, None),
            Err(e) => (None, None, None, 0.0, Some(e)),
        };
        let ratio = match (makespan, baseline) {
            (Some(m), Some(b)) => robust_ratio(m, b).ok(),
            _ => None,
        };
        (
            RunRecord {
                instance: job.inst.name.clone(),
                solver: job.solver.to_string(),
                seed: job.seed,
                uncertainty: set.to_string(),
                deviation: dev,
                makespan,
                feasible,
                vector,
                baseline,
                robust_ratio: ratio,
                error,
            },
            Timing {
                instance: job.inst.name.clone(),
                solver: job.solver.to_string(),
                seed: job.seed,
                uncertainty: set.to_string(),
                deviation: dev,
                wall_seconds: wall,
            },
        )
    };
    let solve = |robust: &RobustConfig| -> Result<Outcome, String> {
        let travel = job.travel.clone()?;
        let mats = assemble_matrices(job.inst, travel, robust).map_err(|e| e.to_string())?;
        let r = job
            .solver
            .solve(job.inst, &mats, &cfg.solver, job.seed)
            .map_err(|e| e.to_string())?;
        Ok(Outcome {
            makespan: r.makespan,
            feasible: check_feasibility(&r.schedule, &mats).is_empty(),
            vector: r.vector.to_string(),
            wall: r.wall_time.as_secs_f64(),
        })
    };

    let base = solve(&RobustConfig::deterministic());
    let baseline = base.as_ref().ok().map(|b| b.makespan);
    out.push(record(UncertaintySet::None, 0.0, base, baseline));
    for &dev in &cfg.deviations {
        let scenarios = generate_scenarios(job.inst, cfg.scenario_seed, cfg.n_scenarios, dev);
        for &set in &cfg.uncertainty {
            let res = match &scenarios {
                Ok(s) => {
                    let mut robust = RobustConfig::new(set, s.clone());
                    robust.omega = cfg.omega;
                    solve(&robust)
                }
                Err(e) => Err(e.to_string()),
            };
            out.push(record(set, dev, res, baseline));
        }
    }
    out
}

/// Runs the sweep. Failing runs are recorded and the sweep continues.
pub fn run_bench(instances: &[ProblemInstance], cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    cfg.validate()?;
    let travel: Vec<Result<TravelTimes, String>> = instances
        .iter()
        .map(|inst| build_travel_times(inst, &inst.map).map_err(|e| e.to_string()))
        .collect();
    let jobs: Vec<Job<'_>> = instances
        .iter()
        .zip(&travel)
        .flat_map(|(inst, t)| {
            cfg.solvers.iter().flat_map(move |&solver| {
                cfg.seeds.iter().map(move |&seed| Job {
                    inst,
                    travel: t.as_ref().map_err(Clone::clone),
                    solver,
                    seed,
                })
            })
        })
        .collect();
    let results: Vec<Vec<(RunRecord, Timing)>> = jobs.par_iter().map(|j| run_job(j, cfg)).collect();
    let (runs, timings): (Vec<_>, Vec<_>) = results.into_iter().flatten().unzip();
    let aggregates = aggregate(&runs);
    Ok(BenchReport {
        runs,
        aggregates,
        skipped: Vec::new(),
        timings,
    })
}

fn aggregate(runs: &[RunRecord]) -> Vec<Aggregate> {
    // keyed by first appearance so the output follows the sweep order
    let mut order: Vec<(String, String, String, u64)> = Vec::new();
    let mut groups: BTreeMap<(String, String, String, u64), Vec<&RunRecord>> = BTreeMap::new();
    for r in runs {
        let key = (
            r.instance.clone(),
            r.solver.clone(),
            r.uncertainty.clone(),
            r.deviation.to_bits(),
        );
        let g = groups.entry(key.clone()).or_default();
        if g.is_empty() {
            order.push(key);
        }
        g.push(r);
    }
    order
        .into_iter()
        .map(|key| {
            let g = &groups[&key];
            let makespans: Vec<f64> = g.iter().filter_map(|r| r.makespan).collect();
            let ratios: Vec<f64> = g.iter().filter_map(|r| r.robust_ratio).collect();
            Aggregate {
                instance: key.0,
                solver: key.1,
                uncertainty: key.2,
                deviation: f64::from_bits(key.3),
                runs: g.len(),
                failures: g.iter().filter(|r| r.error.is_some()).count(),
                makespan: Stats::of(&makespans),
                robust_ratio: Stats::of(&ratios),
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> BenchError + '_ {
    move |e| BenchError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

impl BenchReport {
    pub fn failures(&self) -> usize {
        self.runs.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn write_runs<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "instance", "solver", "seed", "uncertainty", "deviation", "makespan", "feasible",
            "vector", "baseline", "robust_ratio", "error",
        ])?;
        for r in &self.runs {
            w.write_record([
                r.instance.clone(),
                r.solver.clone(),
                r.seed.to_string(),
                r.uncertainty.clone(),
                r.deviation.to_string(),
                opt(r.makespan),
                r.feasible.map(|f| f.to_string()).unwrap_or_default(),
                r.vector.clone().unwrap_or_default(),
                opt(r.baseline),
                opt(r.robust_ratio),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_aggregates<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "instance", "solver", "uncertainty", "deviation", "runs", "failures",
            "makespan_mean", "makespan_std", "makespan_min", "makespan_max",
            "ratio_mean", "ratio_std", "ratio_min", "ratio_max",
        ])?;
        for a in &self.aggregates {
            let mut rec = vec![
                a.instance.clone(),
                a.solver.clone(),
                a.uncertainty.clone(),
                a.deviation.to_string(),
                a.runs.to_string(),
                a.failures.to_string(),
            ];
            for s in [a.makespan, a.robust_ratio] {
                rec.extend([
                    opt(s.map(|s| s.mean)),
                    opt(s.map(|s| s.std)),
                    opt(s.map(|s| s.min)),
                    opt(s.map(|s| s.max)),
                ]);
            }
            w.write_record(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_timings<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for t in &self.timings {
            w.serialize(t)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn ratio_by_set(&self) -> Vec<SetSummary> {
        let mut out: Vec<(SetSummary, Vec<f64>)> = Vec::new();
        for r in &self.runs {
            let pos = out.iter().position(|(s, _)| {
                s.solver == r.solver
                    && s.uncertainty == r.uncertainty
                    && s.deviation.to_bits() == r.deviation.to_bits()
            });
            let i = pos.unwrap_or_else(|| {
                out.push((
                    SetSummary {
                        solver: r.solver.clone(),
                        uncertainty: r.uncertainty.clone(),
                        deviation: r.deviation,
                        runs: 0,
                        mean_robust_ratio: None,
                    },
                    Vec::new(),
                ));
                out.len() - 1
            });
            out[i].0.runs += 1;
            out[i].1.extend(r.robust_ratio);
        }
        out.into_iter()
            .map(|(mut s, ratios)| {
                s.mean_robust_ratio = Stats::of(&ratios).map(|st| st.mean);
                s
            })
            .collect()
    }

    pub fn summary_json(&self, cfg: &BenchConfig) -> String {
        let mut instances: Vec<&str> = Vec::new();
        for r in &self.runs {
            if !instances.contains(&r.instance.as_str()) {
                instances.push(&r.instance);
            }
        }
        let summary = Summary {
            config: cfg,
            instances,
            total_runs: self.runs.len(),
            failures: self.failures(),
            skipped: &self.skipped,
            ratio_by_set: self.ratio_by_set(),
            aggregates: &self.aggregates,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }

    /// Writes `runs.csv`, `aggregates.csv`, `summary.json` and `timings.csv`
    /// into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: &Path, cfg: &BenchConfig) -> Result<(), BenchError> {
        let io_err = |p: &Path, e: io::Error| BenchError::Output {
            path: p.display().to_string(),
            message: e.to_string(),
        };
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let create = |name: &str| {
            let p = dir.join(name);
            fs::File::create(&p).map(|f| (f, p.clone())).map_err(|e| io_err(&p, e))
        };
        let (f, p) = create("runs.csv")?;
        self.write_runs(f).map_err(csv_err(&p))?;
        let (f, p) = create("aggregates.csv")?;
        self.write_aggregates(f).map_err(csv_err(&p))?;
        let (f, p) = create("timings.csv")?;
        self.write_timings(f).map_err(csv_err(&p))?;
        let p = dir.join("summary.json");
        fs::write(&p, self.summary_json(cfg)).map_err(|e| io_err(&p, e))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::one_zone;
    use crate::solvers::SAConfig;

    fn quick() -> BenchConfig {
        BenchConfig {
            seeds: vec![0, 1],
            deviations: vec![0.05, 0.1],
            n_scenarios: 3,
            solver: SolverConfig {
                sa: SAConfig {
                    lk: 5,
                    iter_cap: 5,
                    ..Default::default()
                },
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[test]
    fn sweep_shape() {
        let cfg = quick();
        let report = run_bench(&[one_zone()], &cfg).unwrap();
        // 2 seeds x (baseline + 2 deviations x 3 sets)
        assert_eq!(report.runs.len(), 14);
        assert_eq!(report.aggregates.len(), 7);
        assert_eq!(report.failures(), 0);
        for r in &report.runs {
            assert!(r.robust_ratio.unwrap() >= 0.0);
        }
        assert_eq!(report.timings.len(), report.runs.len());
    }

    #[test]
    fn failures_are_recorded() {
        let mut inst = one_zone();
        inst.robots[1].max_runtime = 5.0;
        let report = run_bench(&[inst, one_zone()], &quick()).unwrap();
        assert_eq!(report.failures(), 14);
        assert_eq!(report.runs.len(), 28);
        assert!(report.runs[0].error.as_ref().unwrap().contains("runtime"));
        assert!(report.runs[27].error.is_none());
    }

    #[test]
    fn files_are_reproducible() {
        let cfg = quick();
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a"), dir.path().join("b"));
        run_bench(&[one_zone()], &cfg).unwrap().write_dir(&a, &cfg).unwrap();
        run_bench(&[one_zone()], &cfg).unwrap().write_dir(&b, &cfg).unwrap();
        for f in ["runs.csv", "aggregates.csv", "summary.json"] {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
        }
        let runs = fs::read_to_string(a.join("runs.csv")).unwrap();
        assert!(runs.starts_with("instance,solver,seed,uncertainty,deviation,makespan"));
    }

    #[test]
    fn directory_loading_skips_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("a.toml"),
            crate::instance::serialize_instance(&one_zone()),
        )
        .unwrap();
        fs::write(dir.path().join("b.toml"), "name = 3").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let (instances, skipped) = load_dir(dir.path()).unwrap();
        assert_eq!(instances.len(), 1);
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].file, "b.toml");
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = BenchConfig {
            deviations: vec![-0.1],
            ..Default::default()
        };
        assert!(run_bench(&[], &cfg).is_err());
    }
}
