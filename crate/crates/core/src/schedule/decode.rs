use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{Encoding, ScheduleError, SolutionVector};
use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;

/// One task on one robot's timeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub robot: usize,
    pub task: usize,
    /// When the robot leaves its previous location.
    pub travel_start: f64,
    pub clean_start: f64,
    pub clean_end: f64,
    /// Idle time between arrival and `clean_start`.
    pub wait: f64,
}

/// Timed routes of all robots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    /// `routes[r]` lists robot `r`'s tasks in execution order, depot excluded.
    pub routes: Vec<Vec<ScheduleEntry>>,
    /// Time each robot is back at the depot, 0 for robots without tasks.
    pub returns: Vec<f64>,
    pub makespan: f64,
}

impl Schedule {
    pub fn entries(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.routes.iter().flatten()
    }

    /// The `Y` relation as `(task, robot)` pairs.
    pub fn assignment(&self) -> Vec<(usize, usize)> {
        self.entries().map(|e| (e.task, e.robot)).collect()
    }

    /// The `X` relation as `(from, to, robot)` edges, depot included.
    /// A robot without tasks contributes the self-loop `(0, 0, r)`.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (r, route) in self.routes.iter().enumerate() {
            if route.is_empty() {
                out.push((0, 0, r));
                continue;
            }
            let mut prev = 0;
            for e in route {
                out.push((prev, e.task, r));
                prev = e.task;
            }
            out.push((prev, 0, r));
        }
        out
    }

    /// Values of the LP variables `X`, `Y`, `U`, `Cmax` induced by this schedule.
    pub fn lp_values(&self) -> HashMap<String, f64> {
        let mut v = HashMap::new();
        for r in 0..self.routes.len() {
            v.insert(format!("Y_0_{r}"), 1.0);
        }
        for (i, j, r) in self.edges() {
            v.insert(format!("X_{i}_{j}_{r}"), 1.0);
        }
        for e in self.entries() {
            v.insert(format!("Y_{}_{}", e.task, e.robot), 1.0);
            v.insert(format!("U_{}", e.task), e.clean_start);
        }
        v.insert("U_0".into(), 0.0);
        v.insert("Cmax".into(), self.makespan);
        v
    }
}

/// The latest return time over all robots.
pub fn makespan(sched: &Schedule) -> f64 {
    sched.returns.iter().copied().fold(0.0, f64::max)
}

/// Turns solution vectors into schedules for one instance.
///
/// Each robot travels to its next task as soon as it finishes the previous
/// one, then waits in place until every predecessor of that task (possibly on
/// other robots) is done.
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    pub encoding: Encoding,
    mats: &'a ModelMatrices,
    predecessors: Vec<Vec<usize>>,
}

impl<'a> Decoder<'a> {
    pub fn new(inst: &ProblemInstance, mats: &'a ModelMatrices) -> Self {
        Self::with_encoding(Encoding::new(inst), mats)
    }

    pub fn with_encoding(encoding: Encoding, mats: &'a ModelMatrices) -> Self {
        let predecessors = (0..mats.n_tasks())
            .map(|j| mats.predecessors(j).collect())
            .collect();
        Self {
            encoding,
            mats,
            predecessors,
        }
    }

    pub fn matrices(&self) -> &'a ModelMatrices {
        self.mats
    }

    pub fn decode(&self, v: &SolutionVector) -> Result<Schedule, ScheduleError> {
        self.encoding.check(v)?;
        let mut routes = vec![Vec::new(); self.encoding.n_robots()];
        let (makespan, returns) = self.simulate(v, Some(&mut routes));
        Ok(Schedule {
            routes,
            returns,
            makespan,
        })
    }

    /// Makespan only. `v` must be structurally valid.
    pub fn makespan(&self, v: &SolutionVector) -> f64 {
        self.simulate(v, None).0
    }

    /// Makespan if `v` respects the runtime limits, otherwise `None`.
    pub fn evaluate(&self, v: &SolutionVector) -> Option<f64> {
        self.encoding
            .within_runtime(v, self.mats)
            .then(|| self.makespan(v))
    }

    fn simulate(
        &self,
        v: &SolutionVector,
        mut record: Option<&mut Vec<Vec<ScheduleEntry>>>,
    ) -> (f64, Vec<f64>) {
        let mats = self.mats;
        let seqs = self.encoding.robot_sequences(v);
        let k = seqs.len();
        let mut finish = vec![f64::NAN; mats.n_tasks()];
        let mut next = vec![0usize; k];
        let mut clock = vec![0.0f64; k];
        let mut at = vec![0usize; k];
        let total: usize = seqs.iter().map(Vec::len).sum();
        let mut done = 0;

        while done < total {
            let mut progressed = false;
            for r in 0..k {
                while let Some(&task) = seqs[r].get(next[r]) {
                    let preds = &self.predecessors[task];
                    if preds.iter().any(|&p| finish[p].is_nan()) {
                        break;
                    }
                    let arrival = clock[r] + mats.travel(at[r], task, r);
                    let ready = preds.iter().map(|&p| finish[p]).fold(arrival, f64::max);
                    let end = ready + mats.cleaning(task, r);
                    if let Some(routes) = record.as_deref_mut() {
                        routes[r].push(ScheduleEntry {
                            robot: r,
                            task,
                            travel_start: clock[r],
                            clean_start: ready,
                            clean_end: end,
                            wait: ready - arrival,
                        });
                    }
                    finish[task] = end;
                    clock[r] = end;
                    at[r] = task;
                    next[r] += 1;
                    done += 1;
                    progressed = true;
                }
            }
            // Segments follow the precedence order of types, so some robot can
            // always move.
            assert!(progressed, "decoder deadlock: precedence graph has a cycle");
        }

        let returns: Vec<f64> = (0..k)
            .map(|r| {
                if seqs[r].is_empty() {
                    0.0
                } else {
                    clock[r] + mats.travel(at[r], 0, r)
                }
            })
            .collect();
        let makespan = returns.iter().copied().fold(0.0, f64::max);
        (makespan, returns)
    }
}

/// Decodes `v` into a schedule.
pub fn decode(
    v: &SolutionVector,
    mats: &ModelMatrices,
    inst: &ProblemInstance,
) -> Result<Schedule, ScheduleError> {
    Decoder::new(inst, mats).decode(v)
}
