//! Solution vectors and their decoding into timed schedules.
//!
//! A [`SolutionVector`] holds, for every task type, the order in which the
//! zones needing that type are served and how many of them each capable
//! robot takes. With zones 1..3, robots R1 and R2 vacuuming and R3 and R4
//! mopping, the vector `1,2,3|3,2,1|2,1|1,2` means R1 vacuums zones 1 then
//! 2, R2 vacuums zone 3, R3 mops zone 3 and R4 mops zones 2 then 1.

mod decode;
mod feasibility;
mod report;

use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;

pub use decode::{decode, makespan, Decoder, Schedule, ScheduleEntry};
pub use feasibility::{check_feasibility, FeasibilityViolation};
pub use report::{gantt_rows, write_gantt_csv, GanttRow, ReportEntry, ScheduleReport};

/// Resampling budget when looking for a vector that respects runtime limits.
pub const DEFAULT_RETRIES: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("malformed solution vector: {0}")]
    Structure(String),
    #[error("no feasible solution found: {0}")]
    Infeasible(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed schedule report: {0}")]
    Report(String),
}

/// Per-type service orders and robot workloads, indexed by task-type id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SolutionVector {
    /// `orders[t]` is a permutation of the zones requiring type `t`.
    pub orders: Vec<Vec<usize>>,
    /// `workloads[t][i]` zones go to the `i`-th robot able to do type `t`
    /// (robots in ascending id order).
    pub workloads: Vec<Vec<usize>>,
}

impl fmt::Display for SolutionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &Vec<usize>| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        let parts: Vec<String> = self
            .orders
            .iter()
            .chain(self.workloads.iter())
            .map(join)
            .collect();
        f.write_str(&parts.join("|"))
    }
}

impl FromStr for SolutionVector {
    type Err = ScheduleError;

    /// Parses `orders|...|workloads|...` with one group per task type each.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let groups: Vec<Vec<usize>> = s
            .split('|')
            .map(|g| {
                g.split(',')
                    .map(str::trim)
                    .filter(|x| !x.is_empty())
                    .map(|x| {
                        x.parse()
                            .map_err(|_| ScheduleError::Structure(format!("bad entry {x:?}")))
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        if groups.len() % 2 != 0 {
            return Err(ScheduleError::Structure(format!(
                "expected an even number of `|`-separated groups, got {}",
                groups.len()
            )));
        }
        let half = groups.len() / 2;
        let mut groups = groups.into_iter();
        let orders = groups.by_ref().take(half).collect();
        let workloads = groups.collect();
        Ok(Self { orders, workloads })
    }
}

/// The shape of the search space of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeSlot {
    pub task_type: usize,
    /// Zones requiring this type, ascending.
    pub zones: Vec<usize>,
    /// Robots able to do this type, ascending.
    pub robots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    /// Indexed by task-type id.
    pub slots: Vec<TypeSlot>,
    /// Types in precedence order; robots process their segments in this order.
    pub type_order: Vec<usize>,
    /// `task_of[zone][type]`, zone ids are 1-based.
    task_of: Vec<Vec<Option<usize>>>,
    n_robots: usize,
}

impl Encoding {
    pub fn new(inst: &ProblemInstance) -> Self {
        let n_types = inst.task_types.len();
        let slots = (0..n_types)
            .map(|t| TypeSlot {
                task_type: t,
                zones: inst
                    .zones
                    .iter()
                    .filter(|z| z.task_types.contains(&t))
                    .map(|z| z.id)
                    .collect(),
                robots: inst
                    .robots
                    .iter()
                    .filter(|r| r.can_perform(t))
                    .map(|r| r.id)
                    .collect(),
            })
            .collect();
        let max_zone = inst.zones.iter().map(|z| z.id).max().unwrap_or(0);
        let mut task_of = vec![vec![None; n_types]; max_zone + 1];
        for task in inst.tasks().iter().skip(1) {
            let t = task.task_type.expect("non-depot task has a type");
            task_of[task.zone][t] = Some(task.id);
        }
        Self {
            slots,
            type_order: inst
                .type_order()
                .unwrap_or_else(|| (0..n_types).collect()),
            task_of,
            n_robots: inst.n_robots(),
        }
    }

    pub fn n_robots(&self) -> usize {
        self.n_robots
    }

    pub fn task_of(&self, zone: usize, task_type: usize) -> Option<usize> {
        self.task_of.get(zone).and_then(|row| row.get(task_type).copied().flatten())
    }

    /// Number of non-depot tasks.
    pub fn n_tasks(&self) -> usize {
        self.slots.iter().map(|s| s.zones.len()).sum()
    }

    /// Checks the structural invariants of `v` against this instance.
    pub fn check(&self, v: &SolutionVector) -> Result<(), ScheduleError> {
        if v.orders.len() != self.slots.len() || v.workloads.len() != self.slots.len() {
            return Err(ScheduleError::Structure(format!(
                "expected {} order and workload groups, got {} and {}",
                self.slots.len(),
                v.orders.len(),
                v.workloads.len()
            )));
        }
        for (slot, (order, load)) in self.slots.iter().zip(v.orders.iter().zip(&v.workloads)) {
            let t = slot.task_type;
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != slot.zones {
                return Err(ScheduleError::Structure(format!(
                    "type {t} order {order:?} is not a permutation of zones {:?}",
                    slot.zones
                )));
            }
            if load.len() != slot.robots.len() {
                return Err(ScheduleError::Structure(format!(
                    "type {t} needs {} workload counts, got {}",
                    slot.robots.len(),
                    load.len()
                )));
            }
            if load.iter().sum::<usize>() != slot.zones.len() {
                return Err(ScheduleError::Structure(format!(
                    "type {t} workloads {load:?} do not sum to {} zones",
                    slot.zones.len()
                )));
            }
        }
        Ok(())
    }

    /// Task ids each robot performs, in execution order.
    pub fn robot_sequences(&self, v: &SolutionVector) -> Vec<Vec<usize>> {
        let mut seqs = vec![Vec::new(); self.n_robots];
        for &t in &self.type_order {
            let slot = &self.slots[t];
            let mut pos = 0;
            for (&robot, &count) in slot.robots.iter().zip(&v.workloads[t]) {
                for &zone in &v.orders[t][pos..pos + count] {
                    seqs[robot].push(self.task_of(zone, t).expect("zone requires type"));
                }
                pos += count;
            }
        }
        seqs
    }

    /// Uniform random permutations and workload splits.
    pub fn random_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> SolutionVector {
        let orders = self
            .slots
            .iter()
            .map(|s| {
                let mut z = s.zones.clone();
                z.shuffle(rng);
                z
            })
            .collect();
        let workloads = self
            .slots
            .iter()
            .map(|s| random_composition(rng, s.zones.len(), s.robots.len()))
            .collect();
        SolutionVector { orders, workloads }
    }

    /// Cleaning seconds each robot accumulates under `v`.
    pub fn robot_loads(&self, v: &SolutionVector, mats: &ModelMatrices) -> Vec<f64> {
        let mut loads = vec![0.0; self.n_robots];
        for (r, seq) in self.robot_sequences(v).iter().enumerate() {
            loads[r] = seq.iter().map(|&j| mats.cleaning(j, r)).sum();
        }
        loads
    }

    /// Whether `v` keeps every robot's cleaning time within its runtime limit.
    pub fn within_runtime(&self, v: &SolutionVector, mats: &ModelMatrices) -> bool {
        self.robot_loads(v, mats)
            .iter()
            .zip(&mats.max_runtime)
            .all(|(load, limit)| runtime_ok(*load, *limit))
    }

    /// Draws random vectors until one respects the runtime limits.
    pub fn random_feasible<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        mats: &ModelMatrices,
        retries: usize,
    ) -> Result<SolutionVector, ScheduleError> {
        for _ in 0..retries.max(1) {
            let v = self.random_vector(rng);
            if self.within_runtime(&v, mats) {
                return Ok(v);
            }
        }
        Err(ScheduleError::Infeasible(format!(
            "{retries} random solution vectors all exceed some robot's maximum runtime"
        )))
    }
}

/// The strict runtime bound, applied with the same slack as the LP export.
pub fn runtime_ok(load: f64, limit: f64) -> bool {
    load <= limit - crate::model::RUNTIME_EPSILON
}

/// A uniformly random way to write `n` as an ordered sum of `k` nonnegative
/// parts (stars and bars).
pub fn random_composition<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    if k == 1 {
        return vec![n];
    }
    let mut bars = index::sample(rng, n + k - 1, k - 1).into_vec();
    bars.sort_unstable();
    let mut out = Vec::with_capacity(k);
    let mut prev = 0;
    for (i, &b) in bars.iter().enumerate() {
        // bar i sits after (b - i) stars
        out.push(b - i - prev);
        prev = b - i;
    }
    out.push(n - prev);
    out
}

/// A random vector satisfying the runtime limits, reproducible per seed.
pub fn random_solution(
    inst: &ProblemInstance,
    seed: u64,
    mats: &ModelMatrices,
) -> Result<SolutionVector, ScheduleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Encoding::new(inst).random_feasible(&mut rng, mats, DEFAULT_RETRIES)
}

/// Relative extra makespan of the robust plan, `(c_robust - c_det) / c_det`.
pub fn robust_ratio(c_robust: f64, c_det: f64) -> Result<f64, ScheduleError> {
    if !(c_det > 0.0) {
        return Err(ScheduleError::Domain(format!(
            "deterministic makespan must be positive, got {c_det}"
        )));
    }
    Ok((c_robust - c_det) / c_det)
}
