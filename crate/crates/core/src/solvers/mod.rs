//! Metaheuristics over [`SolutionVector`]s plus an exhaustive oracle.
//!
//! Every solver draws all randomness from a `ChaCha8Rng` seeded with the
//! configured seed and runs single-threaded, so a fixed configuration always
//! reproduces the same result and trace. Candidates that overrun a robot's
//! maximum runtime are rejected and redrawn, never penalized.

mod config;
mod exact;
mod ga;
mod operators;
mod pso;
mod sa;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;
use crate::schedule::{Schedule, ScheduleError, SolutionVector};

pub use config::{ExactConfig, GAConfig, PSOConfig, SAConfig, SolverConfig};
pub use exact::{solve_exact, solve_exact_with, DEFAULT_EXACT_LIMIT};
pub use ga::solve_ga;
pub use operators::{crossover, mutate, neighbor};
pub use pso::solve_pso;
pub use sa::solve_sa;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("instance has {tasks} tasks, above the exhaustive search limit of {limit}")]
    TooLarge { tasks: usize, limit: usize },
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("time limit of {0:?} reached before the search completed")]
    TimeLimit(Duration),
    #[error(transparent)]
    Schedule(ScheduleError),
}

impl From<ScheduleError> for SolverError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::Infeasible(m) => SolverError::Infeasible(m),
            other => SolverError::Schedule(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    /// Best makespan found up to this iteration.
    pub makespan: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub vector: SolutionVector,
    pub schedule: Schedule,
    pub makespan: f64,
    pub trace: Vec<TracePoint>,
    pub wall_time: Duration,
}

impl SolveResult {
    /// Equality ignoring wall time.
    pub fn same_outcome(&self, other: &SolveResult) -> bool {
        self.vector == other.vector
            && self.schedule == other.schedule
            && self.makespan == other.makespan
            && self.trace == other.trace
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Sa,
    Ga,
    Pso,
    Exact,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [Self::Sa, Self::Ga, Self::Pso, Self::Exact];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sa => "sa",
            Self::Ga => "ga",
            Self::Pso => "pso",
            Self::Exact => "exact",
        }
    }

    /// Runs this solver with `cfg`, overriding the configured seed.
    pub fn solve(
        self,
        inst: &ProblemInstance,
        mats: &ModelMatrices,
        cfg: &SolverConfig,
        seed: u64,
    ) -> Result<SolveResult, SolverError> {
        match self {
            Self::Sa => solve_sa(inst, mats, &SAConfig { seed, ..cfg.sa.clone() }),
            Self::Ga => solve_ga(inst, mats, &GAConfig { seed, ..cfg.ga.clone() }),
            Self::Pso => solve_pso(inst, mats, &PSOConfig { seed, ..cfg.pso.clone() }),
            Self::Exact => solve_exact_with(inst, mats, &cfg.exact),
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sa" => Ok(Self::Sa),
            "ga" => Ok(Self::Ga),
            "pso" => Ok(Self::Pso),
            "exact" => Ok(Self::Exact),
            other => Err(SolverError::Config(format!(
                "unknown solver {other:?} (expected sa, ga, pso or exact)"
            ))),
        }
    }
}

struct Deadline(Option<(Instant, Duration)>);

impl Deadline {
    fn new(limit: Option<f64>) -> Self {
        Self(limit.map(|s| (Instant::now(), Duration::from_secs_f64(s.max(0.0)))))
    }

    fn passed(&self) -> bool {
        self.0.is_some_and(|(start, d)| start.elapsed() >= d)
    }

    fn limit(&self) -> Duration {
        self.0.map(|(_, d)| d).unwrap_or_default()
    }
}

/// Decodes the winner and packs the result.
fn finish(
    decoder: &crate::schedule::Decoder<'_>,
    vector: SolutionVector,
    trace: Vec<TracePoint>,
    started: Instant,
) -> Result<SolveResult, SolverError> {
    let schedule = decoder.decode(&vector)?;
    Ok(SolveResult {
        makespan: schedule.makespan,
        vector,
        schedule,
        trace,
        wall_time: started.elapsed(),
    })
}
