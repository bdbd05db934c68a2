use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{crossover, finish, mutate, Deadline, GAConfig, SolveResult, SolverError, TracePoint};
use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;
use crate::schedule::{Decoder, SolutionVector, DEFAULT_RETRIES};

/// Redraws of an over-runtime child before a parent copy is taken instead.
const CHILD_RETRIES: usize = 20;

/// Genetic algorithm with roulette selection on `1 / makespan`, order
/// crossover of the zone permutations, one-point crossover of the workloads
/// and (mu + lambda) survivor selection, so the incumbent never gets worse.
pub fn solve_ga(
    inst: &ProblemInstance,
    mats: &ModelMatrices,
    cfg: &GAConfig,
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    let started = Instant::now();
    let deadline = Deadline::new(cfg.time_limit);
    let decoder = Decoder::new(inst, mats);
    let enc = &decoder.encoding;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut pop: Vec<(SolutionVector, f64)> = Vec::with_capacity(cfg.pop_size);
    for _ in 0..cfg.pop_size {
        let v = enc.random_feasible(&mut rng, mats, DEFAULT_RETRIES)?;
        let cost = decoder.makespan(&v);
        pop.push((v, cost));
    }
    sort_population(&mut pop);
    let mut trace = vec![TracePoint {
        iteration: 0,
        makespan: pop[0].1,
    }];

    for generation in 1..=cfg.iter_cap {
        let weights = WeightedIndex::new(pop.iter().map(|(_, c)| 1.0 / c.max(f64::MIN_POSITIVE)))
            .expect("makespans are finite");
        let mut offspring = Vec::with_capacity(cfg.pop_size);
        while offspring.len() < cfg.pop_size {
            let a = &pop[weights.sample(&mut rng)].0;
            let b = &pop[weights.sample(&mut rng)].0;
            let mut children = None;
            for _ in 0..CHILD_RETRIES {
                let (mut c1, mut c2) = if rng.gen::<f64>() < cfg.crossover_rate {
                    crossover(enc, a, b, &mut rng)
                } else {
                    (a.clone(), b.clone())
                };
                for c in [&mut c1, &mut c2] {
                    if rng.gen::<f64>() < cfg.mutation_rate {
                        mutate(enc, c, &mut rng);
                    }
                }
                if enc.within_runtime(&c1, mats) && enc.within_runtime(&c2, mats) {
                    children = Some((c1, c2));
                    break;
                }
            }
            let (c1, c2) = children.unwrap_or_else(|| (a.clone(), b.clone()));
            for c in [c1, c2] {
                if offspring.len() < cfg.pop_size {
                    let cost = decoder.makespan(&c);
                    offspring.push((c, cost));
                }
            }
        }
        pop.extend(offspring);
        sort_population(&mut pop);
        pop.truncate(cfg.pop_size);
        trace.push(TracePoint {
            iteration: generation,
            makespan: pop[0].1,
        });
        if deadline.passed() {
            break;
        }
    }
    let best = pop.swap_remove(0).0;
    finish(&decoder, best, trace, started)
}

fn sort_population(pop: &mut [(SolutionVector, f64)]) {
    pop.sort_by(|a, b| a.1.total_cmp(&b.1));
}
