//! Parameter matrices of the allocation model and their robust variants.

mod lp;
mod robust;

use thiserror::Error;

use crate::gridmap::TravelTimes;
use crate::instance::ProblemInstance;

pub use lp::{
    export_lp, lp_model, LinearExpr, LpModel, LpRow, RowCheck, Sense, RUNTIME_EPSILON,
};
pub use robust::{robust_cleaning_time, RobustConfig, RobustTransform, UncertaintySet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("robust configuration error: {0}")]
    Config(String),
    #[error("model assembly error: {0}")]
    Assembly(String),
    #[error("LP parse error on line {line}: {message}")]
    LpParse { line: usize, message: String },
}

/// `P`, `B`, `D`, `T`, `L` and the big-M constant of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMatrices {
    n_tasks: usize,
    n_robots: usize,
    /// `precedence[i * N + j]`: task `i` must finish before task `j` starts.
    precedence: Vec<bool>,
    ability: Vec<bool>,
    /// Cleaning seconds in use (nominal or robust), `N x K`.
    cleaning: Vec<f64>,
    /// Nominal cleaning seconds, `N x K`.
    nominal: Vec<f64>,
    pub travel: TravelTimes,
    pub max_runtime: Vec<f64>,
    /// Big-M.
    pub lambda: f64,
    pub uncertainty: UncertaintySet,
}

impl ModelMatrices {
    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn n_robots(&self) -> usize {
        self.n_robots
    }

    #[inline]
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        self.precedence[i * self.n_tasks + j]
    }

    #[inline]
    pub fn able(&self, task: usize, robot: usize) -> bool {
        self.ability[task * self.n_robots + robot]
    }

    /// `D[task][robot]` as used by the model (robust when configured).
    #[inline]
    pub fn cleaning(&self, task: usize, robot: usize) -> f64 {
        self.cleaning[task * self.n_robots + robot]
    }

    /// `D_bar[task][robot]`, independent of the uncertainty set.
    pub fn nominal_cleaning(&self, task: usize, robot: usize) -> f64 {
        self.nominal[task * self.n_robots + robot]
    }

    #[inline]
    pub fn travel(&self, from: usize, to: usize, robot: usize) -> f64 {
        self.travel.get(from, to, robot)
    }

    /// Predecessors of `task` under `P`.
    pub fn predecessors(&self, task: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_tasks).filter(move |&i| self.precedes(i, task))
    }

    /// Overrides one cleaning time. Used by sensitivity checks.
    pub fn set_cleaning(&mut self, task: usize, robot: usize, seconds: f64) {
        self.cleaning[task * self.n_robots + robot] = seconds;
    }

    /// `sum_j max_r D[j][r] + 2 N max T`.
    pub fn big_m(&self) -> f64 {
        let clean: f64 = (0..self.n_tasks)
            .map(|j| {
                (0..self.n_robots)
                    .map(|r| self.cleaning(j, r))
                    .fold(0.0, f64::max)
            })
            .sum();
        clean + 2.0 * self.n_tasks as f64 * self.travel.max()
    }
}

/// Builds `P`, `B`, `D` (robust per `robust`), `L` and `lambda`.
pub fn assemble_matrices(
    inst: &ProblemInstance,
    travel: &TravelTimes,
    robust: &RobustConfig,
) -> Result<ModelMatrices, ModelError> {
    let tasks = inst.tasks();
    let n = tasks.len();
    let k = inst.n_robots();
    if travel.n_tasks() != n || travel.n_robots() != k {
        return Err(ModelError::Assembly(format!(
            "travel times are {} x {} x {}, expected {n} x {n} x {k}",
            travel.n_tasks(),
            travel.n_tasks(),
            travel.n_robots()
        )));
    }
    let transform = robust.prepare()?;
    if robust.kind != UncertaintySet::None {
        let s = &robust.scenarios.scenarios;
        if s.iter().any(|m| m.len() != n || m.iter().any(|row| row.len() != k)) {
            return Err(ModelError::Config(format!(
                "scenario tables must be {n} x {k} (task x robot)"
            )));
        }
    }

    let mut ability = vec![false; n * k];
    let mut nominal = vec![0.0; n * k];
    let mut cleaning = vec![0.0; n * k];
    for task in tasks.iter().skip(1) {
        let ty = task.task_type.expect("non-depot task has a type");
        for (r, robot) in inst.robots.iter().enumerate() {
            if !robot.can_perform(ty) {
                continue;
            }
            let eff = robot.efficiency(ty).ok_or_else(|| {
                ModelError::Assembly(format!(
                    "robot {} can perform task type {ty} but has no efficiency for it",
                    robot.id
                ))
            })?;
            let d_bar = task.area / eff;
            let idx = task.id * k + r;
            ability[idx] = true;
            nominal[idx] = d_bar;
            cleaning[idx] = if robust.kind == UncertaintySet::None {
                d_bar
            } else {
                transform.apply(d_bar, &robust.scenarios.deviations(task.id, r))
            };
        }
    }

    let mut precedence = vec![false; n * n];
    for a in tasks.iter().skip(1) {
        for b in tasks.iter().skip(1) {
            if a.zone != b.zone || a.id == b.id {
                continue;
            }
            if inst
                .precedence
                .iter()
                .any(|r| Some(r.before) == a.task_type && Some(r.after) == b.task_type)
            {
                precedence[a.id * n + b.id] = true;
            }
        }
    }

    let mut mats = ModelMatrices {
        n_tasks: n,
        n_robots: k,
        precedence,
        ability,
        cleaning,
        nominal,
        travel: travel.clone(),
        max_runtime: inst.robots.iter().map(|r| r.max_runtime).collect(),
        lambda: 0.0,
        uncertainty: robust.kind,
    };
    mats.lambda = mats.big_m();
    Ok(mats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::build_travel_times;
    use crate::instance::tests::one_zone;
    use crate::instance::{generate_scenarios, ScenarioSet};

    fn mats_for(inst: &ProblemInstance, robust: &RobustConfig) -> ModelMatrices {
        let t = build_travel_times(inst, &inst.map).unwrap();
        assemble_matrices(inst, &t, robust).unwrap()
    }

    #[test]
    fn cleaning_time_from_area_and_efficiency() {
        let inst = one_zone();
        let m = mats_for(&inst, &RobustConfig::deterministic());
        // 38.4 m2 / 0.016 m2/s
        assert!((m.cleaning(1, 0) - 2400.0).abs() < 1e-9);
        assert!((m.cleaning(2, 1) - 960.0).abs() < 1e-9);
        assert_eq!(m.cleaning(1, 1), 0.0);
        assert!(!m.able(1, 1));
        for r in 0..2 {
            assert_eq!(m.cleaning(0, r), 0.0);
        }
    }

    #[test]
    fn precedence_expands_within_zone_only() {
        let mut inst = one_zone();
        inst.zones.push(crate::instance::CleaningZone {
            id: 2,
            centroid: crate::gridmap::Cell::new(4, 0),
            area: 10.0,
            label: String::new(),
            task_types: vec![0, 1],
        });
        let m = mats_for(&inst, &RobustConfig::deterministic());
        assert!(m.precedes(1, 2));
        assert!(m.precedes(3, 4));
        assert!(!m.precedes(1, 4));
        assert!(!m.precedes(3, 2));
        assert!(!m.precedes(2, 1));
        for j in 0..5 {
            assert!(!m.precedes(0, j) && !m.precedes(j, 0));
        }
        assert_eq!(m.predecessors(4).collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn travel_uses_speed() {
        let inst = one_zone();
        let m = mats_for(&inst, &RobustConfig::deterministic());
        assert!((m.travel(0, 1, 0) - 22.5).abs() < 1e-12);
        assert_eq!(m.travel(1, 2, 0), 0.0);
    }

    #[test]
    fn big_m_formula() {
        let inst = one_zone();
        let m = mats_for(&inst, &RobustConfig::deterministic());
        let expected = 2400.0 + 960.0 + 2.0 * 3.0 * 22.5;
        assert!((m.lambda - expected).abs() < 1e-9);
    }

    #[test]
    fn robust_matrices_dominate_nominal() {
        let inst = one_zone();
        let set = generate_scenarios(&inst, 7, 10, 0.15).unwrap();
        for kind in UncertaintySet::ROBUST {
            let m = mats_for(&inst, &RobustConfig::new(kind, set.clone()));
            for j in 0..3 {
                for r in 0..2 {
                    assert!(m.cleaning(j, r) >= m.nominal_cleaning(j, r));
                    if !m.able(j, r) {
                        assert_eq!(m.cleaning(j, r), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn robust_without_scenarios_is_rejected() {
        let inst = one_zone();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let cfg = RobustConfig::new(UncertaintySet::Ellipsoidal, ScenarioSet::default());
        assert!(matches!(
            assemble_matrices(&inst, &t, &cfg),
            Err(ModelError::Config(_))
        ));
    }

    #[test]
    fn missing_efficiency() {
        let mut inst = one_zone();
        inst.robots[0].cleaning_efficiency.clear();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        assert!(matches!(
            assemble_matrices(&inst, &t, &RobustConfig::deterministic()),
            Err(ModelError::Assembly(_))
        ));
    }
}
