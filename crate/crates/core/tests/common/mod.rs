//! Fixtures and independent reference implementations shared by the
//! integration tests.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rohyta::{
    assemble_matrices, build_travel_times, load_instance, GridMap, ModelMatrices,
    ProblemInstance, RobustConfig,
};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("fixtures")
        .join(name)
}

pub fn load(name: &str) -> ProblemInstance {
    load_instance(fixture(name)).unwrap()
}

pub fn matrices(inst: &ProblemInstance, robust: &RobustConfig) -> ModelMatrices {
    let t = build_travel_times(inst, &inst.map).unwrap();
    assemble_matrices(inst, &t, robust).unwrap()
}

pub fn det(inst: &ProblemInstance) -> ModelMatrices {
    matrices(inst, &RobustConfig::deterministic())
}

/// Random map with roughly `density` blocked cells.
pub fn random_map(seed: u64, w: usize, h: usize, density: f64) -> GridMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<String> = (0..h)
        .map(|_| {
            (0..w)
                .map(|_| if rng.gen::<f64>() < density { '#' } else { '.' })
                .collect()
        })
        .collect();
    GridMap::from_rows(&rows, 0.25).unwrap()
}

/// Path cost `o + d * sqrt(2)` compared exactly in integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cost {
    o: i64,
    d: i64,
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of a + b * sqrt(2); a^2 == 2 b^2 only when both are zero
        let a = self.o - other.o;
        let b = self.d - other.d;
        if a * a > 2 * b * b {
            a.cmp(&0)
        } else {
            b.cmp(&0)
        }
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Plain Dijkstra over the 8-connected grid without corner cutting. Returns
/// the length in meters, computed as `(o + d * sqrt(2)) * resolution`.
pub fn dijkstra(map: &GridMap, a: (usize, usize), b: (usize, usize)) -> Option<f64> {
    let (w, h) = (map.width(), map.height());
    let free = |x: i64, y: i64| {
        x >= 0
            && y >= 0
            && (x as usize) < w
            && (y as usize) < h
            && map.is_free(rohyta::Cell::new(x as usize, y as usize))
    };
    let idx = |x: usize, y: usize| y * w + x;
    let mut best: Vec<Option<Cost>> = vec![None; w * h];
    let mut heap = BinaryHeap::new();
    best[idx(a.0, a.1)] = Some(Cost { o: 0, d: 0 });
    heap.push(std::cmp::Reverse((Cost { o: 0, d: 0 }, a)));
    while let Some(std::cmp::Reverse((c, (x, y)))) = heap.pop() {
        if best[idx(x, y)] != Some(c) {
            continue;
        }
        if (x, y) == b {
            return Some(
                (c.o as f64 + c.d as f64 * std::f64::consts::SQRT_2) * map.resolution(),
            );
        }
        for dx in -1i64..=1 {
            for dy in -1i64..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                if !free(nx, ny) {
                    continue;
                }
                let diagonal = dx != 0 && dy != 0;
                if diagonal && !(free(x as i64 + dx, y as i64) && free(x as i64, y as i64 + dy)) {
                    continue;
                }
                let next = if diagonal {
                    Cost { o: c.o, d: c.d + 1 }
                } else {
                    Cost { o: c.o + 1, d: c.d }
                };
                let (nx, ny) = (nx as usize, ny as usize);
                if best[idx(nx, ny)].map_or(true, |old| next < old) {
                    best[idx(nx, ny)] = Some(next);
                    heap.push(std::cmp::Reverse((next, (nx, ny))));
                }
            }
        }
    }
    None
}

/// Optimal makespan of an instance with one vacuuming robot (index 0) and
/// one mopping robot (index 1), found by trying every pair of zone orders and
/// simulating the two routes directly from the matrices.
pub fn two_robot_optimum(inst: &ProblemInstance, mats: &ModelMatrices) -> f64 {
    assert_eq!(inst.n_robots(), 2);
    let zones: Vec<usize> = inst.zones.iter().map(|z| z.id).collect();
    let vac = |z: usize| inst.task_id(z, 0).unwrap();
    let mop = |z: usize| inst.task_id(z, 1).unwrap();
    let mut best = f64::INFINITY;
    for vo in permutations(&zones) {
        for mo in permutations(&zones) {
            let mut t = 0.0;
            let mut at = 0;
            let mut vac_end = std::collections::HashMap::new();
            for &z in &vo {
                t += mats.travel(at, vac(z), 0);
                t += mats.cleaning(vac(z), 0);
                vac_end.insert(z, t);
                at = vac(z);
            }
            let vac_back = t + mats.travel(at, 0, 0);
            let mut t = 0.0;
            let mut at = 0;
            for &z in &mo {
                t += mats.travel(at, mop(z), 1);
                t = f64::max(t, vac_end[&z]);
                t += mats.cleaning(mop(z), 1);
                at = mop(z);
            }
            let mop_back = t + mats.travel(at, 0, 1);
            best = best.min(vac_back.max(mop_back));
        }
    }
    best
}

pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, first);
            out.push(p);
        }
    }
    out
}

/// The three-zone fixture with only Robot1 (vacuuming) and Robot3 (mopping).
pub fn two_robot_three_zone() -> ProblemInstance {
    let mut inst = load("three_zone.toml");
    let mop = rohyta::instance::RobotSpec {
        id: 1,
        ..inst.robots[2].clone()
    };
    inst.robots = vec![inst.robots[0].clone(), mop];
    inst.name = "three-zone-two-robots".into();
    inst
}
