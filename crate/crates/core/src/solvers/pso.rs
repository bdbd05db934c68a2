use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finish, Deadline, PSOConfig, SolveResult, SolverError, TracePoint};
use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;
use crate::schedule::{Encoding, SolutionVector, DEFAULT_RETRIES};
use crate::schedule::Decoder;

/// Continuous positions for one instance: for every task type, one key per
/// zone followed by one workload value per able robot, each in `[0, Z_t]`.
struct Layout {
    /// `(offset, zones, robots)` per type.
    blocks: Vec<(usize, usize, usize)>,
    upper: Vec<f64>,
}

impl Layout {
    fn new(enc: &Encoding) -> Self {
        let mut blocks = Vec::with_capacity(enc.slots.len());
        let mut upper = Vec::new();
        for slot in &enc.slots {
            let (z, r) = (slot.zones.len(), slot.robots.len());
            blocks.push((upper.len(), z, r));
            upper.extend(std::iter::repeat((z.max(1)) as f64).take(z + r));
        }
        Self { blocks, upper }
    }

    fn dims(&self) -> usize {
        self.upper.len()
    }

    fn random_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.upper.iter().map(|&u| rng.gen::<f64>() * u).collect()
    }

    /// Rank-order keys give the permutations; workloads are rounded and then
    /// repaired to sum to the zone count.
    fn to_vector(&self, enc: &Encoding, x: &[f64]) -> SolutionVector {
        let mut orders = Vec::with_capacity(self.blocks.len());
        let mut workloads = Vec::with_capacity(self.blocks.len());
        for (slot, &(off, z, r)) in enc.slots.iter().zip(&self.blocks) {
            let keys = &x[off..off + z];
            let mut idx: Vec<usize> = (0..z).collect();
            idx.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]).then(a.cmp(&b)));
            orders.push(idx.into_iter().map(|i| slot.zones[i]).collect());
            workloads.push(round_workloads(&x[off + z..off + z + r], z));
        }
        SolutionVector { orders, workloads }
    }
}

/// Rounds `raw` to integers summing to `total`, moving units where the
/// rounding error is largest.
fn round_workloads(raw: &[f64], total: usize) -> Vec<usize> {
    if raw.is_empty() {
        return Vec::new();
    }
    let mut counts: Vec<usize> = raw.iter().map(|v| v.max(0.0).round() as usize).collect();
    let mut sum: usize = counts.iter().sum();
    while sum > total {
        let i = (0..counts.len())
            .filter(|&i| counts[i] > 0)
            .max_by(|&a, &b| {
                (counts[a] as f64 - raw[a])
                    .total_cmp(&(counts[b] as f64 - raw[b]))
                    .then(b.cmp(&a))
            })
            .expect("positive sum");
        counts[i] -= 1;
        sum -= 1;
    }
    while sum < total {
        let i = (0..counts.len())
            .max_by(|&a, &b| {
                (raw[a] - counts[a] as f64)
                    .total_cmp(&(raw[b] - counts[b] as f64))
                    .then(b.cmp(&a))
            })
            .expect("nonempty");
        counts[i] += 1;
        sum += 1;
    }
    counts
}

struct Particle {
    x: Vec<f64>,
    v: Vec<f64>,
    best_x: Vec<f64>,
    best_cost: f64,
}

/// Particle swarm over random-key encodings.
///
/// Initial particles are redrawn until they respect the runtime limits.
/// During flight an over-runtime position is not evaluated, so it can never
/// become a personal or global best.
pub fn solve_pso(
    inst: &ProblemInstance,
    mats: &ModelMatrices,
    cfg: &PSOConfig,
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let started = Instant::now();
    let deadline = Deadline::new(cfg.time_limit);
    let decoder = Decoder::new(inst, mats);
    let enc = &decoder.encoding;
    let layout = Layout::new(enc);
    let dims = layout.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut swarm = Vec::with_capacity(cfg.n_particles);
    for _ in 0..cfg.n_particles {
        let mut placed = None;
        for _ in 0..DEFAULT_RETRIES {
            let x = layout.random_position(&mut rng);
            let vec = layout.to_vector(enc, &x);
            if enc.within_runtime(&vec, mats) {
                placed = Some((x, decoder.makespan(&vec)));
                break;
            }
        }
        let (x, cost) = placed.ok_or_else(|| {
            SolverError::Infeasible(format!(
                "{DEFAULT_RETRIES} random particle positions all exceed some robot's maximum runtime"
            ))
        })?;
        let v = (0..dims)
            .map(|_| rng.gen_range(-cfg.v_max..=cfg.v_max))
            .collect();
        swarm.push(Particle {
            best_x: x.clone(),
            x,
            v,
            best_cost: cost,
        });
    }

    let leader = |swarm: &[Particle]| {
        let mut best = 0;
        for (i, p) in swarm.iter().enumerate() {
            if p.best_cost < swarm[best].best_cost {
                best = i;
            }
        }
        (swarm[best].best_x.clone(), swarm[best].best_cost)
    };
    let (mut g_x, mut g_cost) = leader(&swarm);
    let mut trace = vec![TracePoint {
        iteration: 0,
        makespan: g_cost,
    }];

    for iteration in 1..=cfg.iter_cap {
        for p in swarm.iter_mut() {
            for d in 0..dims {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let v = cfg.inertia * p.v[d]
                    + cfg.c1 * r1 * (p.best_x[d] - p.x[d])
                    + cfg.c2 * r2 * (g_x[d] - p.x[d]);
                p.v[d] = v.clamp(-cfg.v_max, cfg.v_max);
                p.x[d] = (p.x[d] + p.v[d]).clamp(0.0, layout.upper[d]);
            }
            let vec = layout.to_vector(enc, &p.x);
            if let Some(cost) = decoder.evaluate(&vec) {
                if cost < p.best_cost {
                    p.best_cost = cost;
                    p.best_x.clone_from(&p.x);
                }
            }
        }
        let (x, cost) = leader(&swarm);
        if cost < g_cost {
            g_x = x;
            g_cost = cost;
        }
        trace.push(TracePoint {
            iteration,
            makespan: g_cost,
        });
        if deadline.passed() {
            break;
        }
    }
    let best = layout.to_vector(enc, &g_x);
    finish(&decoder, best, trace, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::build_travel_times;
    use crate::instance::{generate_instance, reference_robots, GeneratorParams};
    use crate::model::{assemble_matrices, RobustConfig};

    #[test]
    fn rounding_repairs_sum() {
        assert_eq!(round_workloads(&[1.4, 1.4, 1.4], 3), vec![1, 1, 1]);
        assert_eq!(round_workloads(&[2.6, 2.6], 4), vec![2, 2]);
        assert_eq!(round_workloads(&[0.0, 0.0], 2), vec![1, 1]);
        assert_eq!(round_workloads(&[3.0, 0.2], 3), vec![3, 0]);
        assert_eq!(round_workloads(&[], 0), Vec::<usize>::new());
    }

    #[test]
    fn decoded_positions_are_valid() {
        let inst =
            generate_instance(8, 5, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        let enc = Encoding::new(&inst);
        let layout = Layout::new(&enc);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let x = layout.random_position(&mut rng);
            enc.check(&layout.to_vector(&enc, &x)).unwrap();
        }
    }

    #[test]
    fn frozen_swarm_keeps_best_initial() {
        let inst =
            generate_instance(8, 4, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let m = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        let cfg = PSOConfig {
            n_particles: 15,
            iter_cap: 10,
            inertia: 0.0,
            c1: 0.0,
            c2: 0.0,
            ..Default::default()
        };
        let r = solve_pso(&inst, &m, &cfg).unwrap();
        assert!(r.trace.iter().all(|p| p.makespan == r.trace[0].makespan));
    }
}
