//! Seeded random instances and deviation scenarios.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    validate_instance, CleaningZone, InstanceError, PrecedenceRule, ProblemInstance, RobotSpec,
    ScenarioSet, TaskType,
};
use crate::gridmap::{Cell, GridMap};

const TYPE_NAMES: [&str; 3] = ["vacuuming", "mopping", "disinfecting"];

/// The four reference cleaning robots. Runtimes given as a range use the
/// lower end.
pub fn reference_robots() -> Vec<RobotSpec> {
    let robot = |id: usize, ability: usize, eff: f64, hours: f64, battery: f64| RobotSpec {
        id,
        name: format!("Robot{}", id + 1),
        abilities: vec![ability],
        cleaning_efficiency: vec![eff],
        travel_speed: 0.2,
        max_runtime: hours * 3600.0,
        battery_capacity: battery,
    };
    vec![
        robot(0, 0, 0.016, 2.5, 3200.0),
        robot(1, 0, 0.023, 3.0, 5200.0),
        robot(2, 1, 0.04, 2.0, 2150.0),
        robot(3, 1, 0.07, 2.5, 2300.0),
    ]
}

/// Knobs for the random floor-plan generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
    /// Number of rectangular obstacles.
    pub obstacles: usize,
    /// Largest obstacle side, in cells.
    pub max_obstacle_side: usize,
    pub min_area: f64,
    pub max_area: f64,
    /// Map redraws before giving up.
    pub max_attempts: usize,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        Self {
            width: 60,
            height: 40,
            resolution: 0.2,
            obstacles: 8,
            max_obstacle_side: 10,
            min_area: 4.0,
            max_area: 12.0,
            max_attempts: 100,
        }
    }
}

/// Random instance on a rectangular map with rectangular obstacles. Every
/// zone requires every type and types form the chain `0 -> 1 -> ...`.
pub fn generate_instance(
    seed: u64,
    n_zones: usize,
    n_types: usize,
    robots: &[RobotSpec],
    params: &GeneratorParams,
) -> Result<ProblemInstance, InstanceError> {
    if n_zones == 0 {
        return Err(InstanceError::Argument("n_zones must be at least 1".into()));
    }
    if n_types == 0 {
        return Err(InstanceError::Argument("n_types must be at least 1".into()));
    }
    if !(params.min_area > 0.0 && params.min_area <= params.max_area) {
        return Err(InstanceError::Argument(format!(
            "area bounds must satisfy 0 < min <= max, got [{}, {}]",
            params.min_area, params.max_area
        )));
    }
    for t in 0..n_types {
        if !robots.iter().any(|r| r.can_perform(t)) {
            return Err(InstanceError::Argument(format!(
                "no robot covers task type {t}"
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let task_types: Vec<TaskType> = (0..n_types)
        .map(|id| TaskType {
            id,
            name: TYPE_NAMES
                .get(id)
                .map(|s| s.to_string())
                .unwrap_or_else(|| format!("type{id}")),
        })
        .collect();
    let precedence: Vec<PrecedenceRule> = (1..n_types)
        .map(|t| PrecedenceRule {
            before: t - 1,
            after: t,
        })
        .collect();
    let robots: Vec<RobotSpec> = robots
        .iter()
        .enumerate()
        .map(|(id, r)| RobotSpec { id, ..r.clone() })
        .collect();

    for _ in 0..params.max_attempts.max(1) {
        let map = random_map(&mut rng, params)?;
        let free: Vec<Cell> = map.free_cells().collect();
        let Some(&depot) = free.choose(&mut rng) else {
            continue;
        };
        let mut component = map.reachable_from(depot);
        component.retain(|&c| c != depot);
        if component.len() < n_zones {
            continue;
        }
        let centroids: Vec<Cell> = component
            .choose_multiple(&mut rng, n_zones)
            .copied()
            .collect();
        let zones = centroids
            .into_iter()
            .enumerate()
            .map(|(i, centroid)| CleaningZone {
                id: i + 1,
                centroid,
                area: round_cm2(rng.gen_range(params.min_area..=params.max_area)),
                label: format!("zone{}", i + 1),
                task_types: (0..n_types).collect(),
            })
            .collect();
        let inst = ProblemInstance {
            name: format!("gen-s{seed}-z{n_zones}-t{n_types}"),
            zones,
            task_types: task_types.clone(),
            robots: robots.clone(),
            precedence: precedence.clone(),
            depot,
            map,
            scenarios: None,
        };
        let violations = validate_instance(&inst);
        if violations.is_empty() {
            return Ok(inst);
        }
        return Err(InstanceError::Invalid(violations));
    }
    Err(InstanceError::Generation(format!(
        "could not place depot and {n_zones} connected zone centroids on a {}x{} map after {} attempts",
        params.width, params.height, params.max_attempts
    )))
}

// Keeps generated areas readable in instance files.
fn round_cm2(a: f64) -> f64 {
    (a * 100.0).round() / 100.0
}

fn random_map(rng: &mut ChaCha8Rng, p: &GeneratorParams) -> Result<GridMap, InstanceError> {
    let mut map = GridMap::open(p.width, p.height, p.resolution)?;
    if p.width == 0 || p.height == 0 {
        return Ok(map);
    }
    for _ in 0..p.obstacles {
        let side = p.max_obstacle_side.max(1);
        let w = rng.gen_range(1..=side.min(p.width));
        let h = rng.gen_range(1..=side.min(p.height));
        let x0 = rng.gen_range(0..=p.width - w);
        let y0 = rng.gen_range(0..=p.height - h);
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                map.set_blocked(Cell::new(x, y), true);
            }
        }
    }
    Ok(map)
}

/// Draws `count` scenarios of nonnegative delays. For each (task, robot)
/// pair the robot can perform, entries are uniform on
/// `[0, deviation * nominal_time]`; all other entries are 0.
///
/// The sequence of uniform draws does not depend on `deviation`, so the same
/// seed at a larger deviation scales every entry proportionally.
pub fn generate_scenarios(
    inst: &ProblemInstance,
    seed: u64,
    count: usize,
    deviation: f64,
) -> Result<ScenarioSet, InstanceError> {
    if !(deviation.is_finite() && deviation >= 0.0) {
        return Err(InstanceError::Argument(format!(
            "deviation must be a nonnegative fraction, got {deviation}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tasks = inst.tasks();
    let k = inst.n_robots();
    let scenarios = (0..count)
        .map(|_| {
            tasks
                .iter()
                .map(|task| {
                    (0..k)
                        .map(|r| match inst.nominal_cleaning_time(task, r) {
                            Some(d) if !task.is_depot() => {
                                let u: f64 = rng.gen();
                                u * deviation * d
                            }
                            _ => 0.0,
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    Ok(ScenarioSet { scenarios })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_zones_two_types() {
        let inst =
            generate_instance(1, 3, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        assert_eq!(inst.n_tasks(), 7);
        assert_eq!(inst.n_robots(), 4);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn same_seed_same_instance() {
        let p = GeneratorParams::default();
        let a = generate_instance(42, 5, 2, &reference_robots(), &p).unwrap();
        let b = generate_instance(42, 5, 2, &reference_robots(), &p).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(43, 5, 2, &reference_robots(), &p).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_zones_is_rejected() {
        let err = generate_instance(1, 0, 2, &reference_robots(), &GeneratorParams::default());
        assert!(matches!(err, Err(InstanceError::Argument(_))));
    }

    #[test]
    fn uncovered_type_is_rejected() {
        let robots = &reference_robots()[..2];
        let err = generate_instance(1, 2, 2, robots, &GeneratorParams::default());
        assert!(matches!(err, Err(InstanceError::Argument(_))));
    }

    #[test]
    fn impossible_placement() {
        let p = GeneratorParams {
            width: 2,
            height: 2,
            obstacles: 0,
            max_attempts: 3,
            ..GeneratorParams::default()
        };
        let err = generate_instance(1, 10, 2, &reference_robots(), &p);
        assert!(matches!(err, Err(InstanceError::Generation(_))));
    }

    #[test]
    fn zero_deviation_is_all_zero() {
        let inst =
            generate_instance(3, 3, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        let set = generate_scenarios(&inst, 9, 4, 0.0).unwrap();
        assert_eq!(set.len(), 4);
        assert!(set.scenarios.iter().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn ten_scenarios_respect_ability() {
        let mut inst =
            generate_instance(3, 4, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        let set = generate_scenarios(&inst, 9, 10, 0.10).unwrap();
        assert_eq!(set.len(), 10);
        let tasks = inst.tasks();
        for s in &set.scenarios {
            for t in &tasks {
                for r in 0..inst.n_robots() {
                    match inst.nominal_cleaning_time(t, r) {
                        Some(d) if !t.is_depot() => {
                            assert!((0.0..=0.10 * d).contains(&s[t.id][r]))
                        }
                        _ => assert_eq!(s[t.id][r], 0.0),
                    }
                }
            }
        }
        inst.scenarios = Some(set);
        assert!(validate_instance(&inst).is_empty());
    }

    #[test]
    fn deviation_bound_for_2400_seconds() {
        // 38.4 m2 at 0.016 m2/s is 2400 s nominal for Robot1.
        let inst = crate::instance::tests::one_zone();
        let set = generate_scenarios(&inst, 5, 50, 0.10).unwrap();
        for s in &set.scenarios {
            assert!((0.0..=240.0).contains(&s[1][0]));
        }
    }

    #[test]
    fn scenarios_scale_with_deviation() {
        let inst = crate::instance::tests::one_zone();
        let a = generate_scenarios(&inst, 5, 3, 0.05).unwrap();
        let b = generate_scenarios(&inst, 5, 3, 0.10).unwrap();
        for (sa, sb) in a.scenarios.iter().zip(&b.scenarios) {
            for (ra, rb) in sa.iter().zip(sb) {
                for (x, y) in ra.iter().zip(rb) {
                    assert!(y >= x);
                }
            }
        }
    }

    #[test]
    fn negative_deviation_is_rejected() {
        let inst = crate::instance::tests::one_zone();
        assert!(generate_scenarios(&inst, 1, 1, -0.1).is_err());
    }
}
