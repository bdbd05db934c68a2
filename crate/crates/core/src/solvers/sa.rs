use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finish, neighbor, Deadline, SAConfig, SolveResult, SolverError, TracePoint};
use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;
use crate::schedule::{Decoder, DEFAULT_RETRIES};

/// Redraws of an over-runtime neighbor before the proposal is skipped.
const NEIGHBOR_RETRIES: usize = 100;

/// Simulated annealing with geometric cooling and Metropolis acceptance.
///
/// Each temperature level makes `lk` proposals. The trace records the
/// incumbent after every level, preceded by the initial solution at level 0.
pub fn solve_sa(
    inst: &ProblemInstance,
    mats: &ModelMatrices,
    cfg: &SAConfig,
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let started = Instant::now();
    let deadline = Deadline::new(cfg.time_limit);
    let decoder = Decoder::new(inst, mats);
    let enc = &decoder.encoding;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut current = enc.random_feasible(&mut rng, mats, DEFAULT_RETRIES)?;
    let mut current_cost = decoder.makespan(&current);
    let mut best = current.clone();
    let mut best_cost = current_cost;
    let mut trace = vec![TracePoint {
        iteration: 0,
        makespan: best_cost,
    }];

    let mut temp = cfg.t0;
    let mut level = 0;
    while level < cfg.iter_cap {
        for _ in 0..cfg.lk {
            let candidate = (0..NEIGHBOR_RETRIES)
                .map(|_| neighbor(enc, &current, &mut rng))
                .find(|y| enc.within_runtime(y, mats));
            let Some(candidate) = candidate else {
                continue;
            };
            let cost = decoder.makespan(&candidate);
            let delta = cost - current_cost;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                current = candidate;
                current_cost = cost;
                if current_cost < best_cost {
                    best = current.clone();
                    best_cost = current_cost;
                }
            }
        }
        level += 1;
        trace.push(TracePoint {
            iteration: level,
            makespan: best_cost,
        });
        temp *= cfg.alpha;
        if temp <= cfg.ts || deadline.passed() {
            break;
        }
    }
    finish(&decoder, best, trace, started)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::build_travel_times;
    use crate::instance::tests::one_zone;
    use crate::model::{assemble_matrices, RobustConfig};

    fn mats(inst: &ProblemInstance) -> ModelMatrices {
        let t = build_travel_times(inst, &inst.map).unwrap();
        assemble_matrices(inst, &t, &RobustConfig::deterministic()).unwrap()
    }

    #[test]
    fn single_point_space() {
        let inst = one_zone();
        let m = mats(&inst);
        let cfg = SAConfig {
            lk: 5,
            iter_cap: 3,
            ..Default::default()
        };
        let r = solve_sa(&inst, &m, &cfg).unwrap();
        assert_eq!(r.vector.to_string(), "1|1|1|1");
        assert_eq!(r.trace.len(), 4);
        assert!(r.trace.iter().all(|p| p.makespan == r.makespan));
    }

    #[test]
    fn equal_temperatures_run_one_level() {
        let inst = one_zone();
        let m = mats(&inst);
        let cfg = SAConfig {
            t0: 1.0,
            ts: 1.0,
            lk: 2,
            ..Default::default()
        };
        let r = solve_sa(&inst, &m, &cfg).unwrap();
        assert_eq!(r.trace.len(), 2);
    }

    #[test]
    fn no_feasible_start() {
        let inst = one_zone();
        let mut m = mats(&inst);
        m.max_runtime = vec![10.0; 2];
        let err = solve_sa(&inst, &m, &SAConfig::default()).unwrap_err();
        assert!(matches!(err, SolverError::Infeasible(_)));
    }
}
