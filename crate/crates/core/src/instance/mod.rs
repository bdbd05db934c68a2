//! Problem data: cleaning zones, task types, robots and precedence rules.
//!
//! Tasks are derived, not stored. Task 0 is the depot; the remaining tasks
//! are enumerated zone by zone (in zone order) and, within a zone, by
//! ascending task-type id over the types that zone requires.

mod format;
mod generate;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::gridmap::{Cell, GridError, GridMap};

pub use format::{load_instance, parse_instance, parse_instance_in, serialize_instance};
pub use generate::{
    generate_instance, generate_scenarios, reference_robots, GeneratorParams,
};

#[derive(Debug, Clone, PartialEq)]
pub struct CleaningZone {
    /// 1-based, contiguous.
    pub id: usize,
    pub centroid: Cell,
    /// Square meters.
    pub area: f64,
    pub label: String,
    /// Task-type ids this zone requires, ascending.
    pub task_types: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskType {
    pub id: usize,
    pub name: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub id: usize,
    /// Zone id, 0 for the depot.
    pub zone: usize,
    /// `None` for the depot.
    pub task_type: Option<usize>,
    pub area: f64,
}

impl Task {
    pub fn is_depot(&self) -> bool {
        self.id == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotSpec {
    /// 0-based, contiguous.
    pub id: usize,
    pub name: String,
    /// Task-type ids this robot can perform.
    pub abilities: Vec<usize>,
    /// Square meters per second, parallel to `abilities`.
    pub cleaning_efficiency: Vec<f64>,
    /// Meters per second.
    pub travel_speed: f64,
    /// Seconds.
    pub max_runtime: f64,
    /// Milliamp-hours, informational only.
    pub battery_capacity: f64,
}

impl RobotSpec {
    pub fn can_perform(&self, task_type: usize) -> bool {
        self.abilities.contains(&task_type)
    }

    pub fn efficiency(&self, task_type: usize) -> Option<f64> {
        self.abilities
            .iter()
            .position(|&a| a == task_type)
            .and_then(|i| self.cleaning_efficiency.get(i).copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecedenceRule {
    pub before: usize,
    pub after: usize,
}

/// Historical deviations from the nominal cleaning time.
///
/// `scenarios[s][task][robot]` is the deviation in seconds recorded in
/// scenario `s`; entries for pairs the robot cannot perform are 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioSet {
    pub scenarios: Vec<Vec<Vec<f64>>>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    /// The length-`S` deviation vector of one (task, robot) pair.
    pub fn deviations(&self, task: usize, robot: usize) -> Vec<f64> {
        self.scenarios.iter().map(|s| s[task][robot]).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub zones: Vec<CleaningZone>,
    pub task_types: Vec<TaskType>,
    pub robots: Vec<RobotSpec>,
    pub precedence: Vec<PrecedenceRule>,
    pub depot: Cell,
    pub map: GridMap,
    pub scenarios: Option<ScenarioSet>,
}

/// One broken invariant, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub entity: String,
    pub rule: String,
}

impl Violation {
    fn new(entity: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            entity: entity.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance schema error: {0}")]
    Schema(String),
    #[error("invalid instance:\n{}", .0.iter().map(|v| format!("  - {v}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<Violation>),
    #[error("map error: {0}")]
    Map(#[from] GridError),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("instance generation failed: {0}")]
    Generation(String),
}

impl ProblemInstance {
    pub fn n_robots(&self) -> usize {
        self.robots.len()
    }

    /// N, the task count including the depot.
    pub fn n_tasks(&self) -> usize {
        1 + self.zones.iter().map(|z| z.task_types.len()).sum::<usize>()
    }

    pub fn tasks(&self) -> Vec<Task> {
        let mut tasks = Vec::with_capacity(self.n_tasks());
        tasks.push(Task {
            id: 0,
            zone: 0,
            task_type: None,
            area: 0.0,
        });
        for zone in &self.zones {
            for &t in &zone.task_types {
                tasks.push(Task {
                    id: tasks.len(),
                    zone: zone.id,
                    task_type: Some(t),
                    area: zone.area,
                });
            }
        }
        tasks
    }

    /// Task id of the (zone, type) pair, if the zone requires that type.
    pub fn task_id(&self, zone: usize, task_type: usize) -> Option<usize> {
        let mut next = 1;
        for z in &self.zones {
            if z.id == zone {
                return z
                    .task_types
                    .iter()
                    .position(|&t| t == task_type)
                    .map(|p| next + p);
            }
            next += z.task_types.len();
        }
        None
    }

    pub fn zone(&self, id: usize) -> Option<&CleaningZone> {
        self.zones.iter().find(|z| z.id == id)
    }

    pub fn task_location(&self, task: &Task) -> Cell {
        if task.is_depot() {
            self.depot
        } else {
            self.zone(task.zone).map(|z| z.centroid).unwrap_or(self.depot)
        }
    }

    /// Human-readable label such as `kitchen/mopping`.
    pub fn task_label(&self, task: &Task) -> String {
        match task.task_type {
            None => "depot".to_string(),
            Some(t) => {
                let zone = self
                    .zone(task.zone)
                    .map(|z| {
                        if z.label.is_empty() {
                            format!("zone{}", z.id)
                        } else {
                            z.label.clone()
                        }
                    })
                    .unwrap_or_else(|| format!("zone{}", task.zone));
                let ty = self
                    .task_types
                    .iter()
                    .find(|ty| ty.id == t)
                    .map(|ty| ty.name.clone())
                    .unwrap_or_else(|| format!("type{t}"));
                format!("{zone}/{ty}")
            }
        }
    }

    /// The ideal cleaning time `area / efficiency`, or `None` when the robot
    /// cannot perform the task. The depot costs 0 for everyone.
    pub fn nominal_cleaning_time(&self, task: &Task, robot: usize) -> Option<f64> {
        let spec = &self.robots[robot];
        match task.task_type {
            None => Some(0.0),
            Some(t) => spec.efficiency(t).map(|e| task.area / e),
        }
    }

    /// Task types in a topological order of the precedence rules (ties by id),
    /// or `None` if the rules contain a cycle.
    pub fn type_order(&self) -> Option<Vec<usize>> {
        let ids: Vec<usize> = self.task_types.iter().map(|t| t.id).collect();
        let mut remaining: BTreeSet<usize> = ids.iter().copied().collect();
        let mut order = Vec::with_capacity(ids.len());
        while !remaining.is_empty() {
            let next = remaining.iter().copied().find(|&t| {
                !self
                    .precedence
                    .iter()
                    .any(|r| r.after == t && r.before != t && remaining.contains(&r.before))
                    && !self.precedence.iter().any(|r| r.after == t && r.before == t)
            })?;
            remaining.remove(&next);
            order.push(next);
        }
        Some(order)
    }
}

/// Checks every invariant of the data model. An empty list means valid.
pub fn validate_instance(inst: &ProblemInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    let n_types = inst.task_types.len();
    let map = &inst.map;

    if inst.zones.is_empty() {
        out.push(Violation::new("zones", "at least one cleaning zone is required"));
    }
    for (i, ty) in inst.task_types.iter().enumerate() {
        if ty.id != i {
            out.push(Violation::new(
                format!("task type {}", ty.id),
                format!("task type ids must be unique and contiguous from 0 (expected {i})"),
            ));
        }
    }
    let type_ok = |t: usize| t < n_types;

    if !map.is_free(inst.depot) {
        out.push(Violation::new(
            "depot",
            format!("location {} must be a free map cell", inst.depot),
        ));
    }

    for (i, zone) in inst.zones.iter().enumerate() {
        let name = format!("zone {}", zone.id);
        if zone.id != i + 1 {
            out.push(Violation::new(
                &name,
                format!("zone ids must be unique and contiguous from 1 (expected {})", i + 1),
            ));
        }
        if !(zone.area.is_finite() && zone.area > 0.0) {
            out.push(Violation::new(&name, "area must be positive"));
        }
        if !map.is_free(zone.centroid) {
            out.push(Violation::new(
                &name,
                format!("centroid {} must be a free map cell", zone.centroid),
            ));
        }
        if zone.task_types.is_empty() {
            out.push(Violation::new(&name, "zone must require at least one task type"));
        }
        let mut seen = BTreeSet::new();
        for &t in &zone.task_types {
            if !type_ok(t) {
                out.push(Violation::new(&name, format!("unknown task type {t}")));
            } else if !seen.insert(t) {
                out.push(Violation::new(
                    &name,
                    format!("task type {t} listed twice; each (zone, type) pair may appear once"),
                ));
            }
        }
    }

    for (i, robot) in inst.robots.iter().enumerate() {
        let name = format!("robot {}", robot.id);
        if robot.id != i {
            out.push(Violation::new(
                &name,
                format!("robot ids must be unique and contiguous from 0 (expected {i})"),
            ));
        }
        if robot.abilities.is_empty() {
            out.push(Violation::new(&name, "abilities must be non-empty"));
        }
        if robot.abilities.len() != robot.cleaning_efficiency.len() {
            out.push(Violation::new(
                &name,
                "exactly one cleaning efficiency per ability is required",
            ));
        }
        let mut seen = BTreeSet::new();
        for &a in &robot.abilities {
            if !type_ok(a) {
                out.push(Violation::new(&name, format!("unknown ability (task type {a})")));
            } else if !seen.insert(a) {
                out.push(Violation::new(&name, format!("ability {a} listed twice")));
            }
        }
        if robot
            .cleaning_efficiency
            .iter()
            .any(|e| !(e.is_finite() && *e > 0.0))
        {
            out.push(Violation::new(&name, "cleaning efficiencies must be positive"));
        }
        if !(robot.travel_speed.is_finite() && robot.travel_speed > 0.0) {
            out.push(Violation::new(&name, "travel speed must be positive"));
        }
        if !(robot.max_runtime > 0.0) {
            out.push(Violation::new(&name, "maximum runtime must be positive"));
        }
    }

    for rule in &inst.precedence {
        if !type_ok(rule.before) || !type_ok(rule.after) {
            out.push(Violation::new(
                format!("precedence {} -> {}", rule.before, rule.after),
                "rule references an unknown task type",
            ));
        }
    }
    if inst.type_order().is_none() {
        out.push(Violation::new(
            "precedence",
            "precedence rules over task types must be acyclic",
        ));
    }

    for task in inst.tasks().iter().skip(1) {
        let t = task.task_type.expect("non-depot task has a type");
        if type_ok(t) && !inst.robots.iter().any(|r| r.can_perform(t)) {
            out.push(Violation::new(
                format!("task {} ({})", task.id, inst.task_label(task)),
                "ability coverage: no robot is able to perform this task",
            ));
        }
    }

    if let Some(set) = &inst.scenarios {
        let n = inst.n_tasks();
        let k = inst.n_robots();
        let tasks = inst.tasks();
        for (s, scenario) in set.scenarios.iter().enumerate() {
            let name = format!("scenario {s}");
            if scenario.len() != n || scenario.iter().any(|row| row.len() != k) {
                out.push(Violation::new(
                    &name,
                    format!("must hold an {n} x {k} (task x robot) deviation table"),
                ));
                continue;
            }
            for task in &tasks {
                for r in 0..k {
                    let v = scenario[task.id][r];
                    if !v.is_finite() {
                        out.push(Violation::new(
                            &name,
                            format!("deviation for task {} robot {r} is not finite", task.id),
                        ));
                    } else if v != 0.0 && inst.nominal_cleaning_time(task, r).is_none() {
                        out.push(Violation::new(
                            &name,
                            format!(
                                "deviation for task {} robot {r} must be 0 (robot cannot perform it)",
                                task.id
                            ),
                        ));
                    } else if v != 0.0 && task.is_depot() {
                        out.push(Violation::new(&name, "depot deviations must be 0"));
                    }
                }
            }
        }
    }

    out
}
