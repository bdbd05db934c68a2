use std::time::Instant;

use super::{finish, Deadline, ExactConfig, SolveResult, SolverError, TracePoint};
use crate::instance::ProblemInstance;
use crate::model::ModelMatrices;
use crate::schedule::{Decoder, SolutionVector};

/// Largest number of non-depot tasks enumerated by default.
pub const DEFAULT_EXACT_LIMIT: usize = 8;

/// All permutations of `items` in lexicographic order of positions.
fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..items.len()).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // next lexicographic permutation
        let Some(i) = (1..idx.len()).rev().find(|&i| idx[i - 1] < idx[i]) else {
            return out;
        };
        let j = (i..idx.len()).rev().find(|&j| idx[j] > idx[i - 1]).unwrap();
        idx.swap(i - 1, j);
        idx[i..].reverse();
    }
}

/// All ways to write `n` as an ordered sum of `k` nonnegative parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exhaustive search with the default configuration.
pub fn solve_exact(
    inst: &ProblemInstance,
    mats: &ModelMatrices,
    limit: usize,
) -> Result<SolveResult, SolverError> {
    solve_exact_with(
        inst,
        mats,
        &ExactConfig {
            limit,
            ..ExactConfig::default()
        },
    )
}

/// Enumerates every zone permutation and workload split of every task type
/// and returns the first vector, in enumeration order, of least makespan.
///
/// This is the reference optimum for small instances; it refuses instances
/// with more than `cfg.limit` non-depot tasks and fails rather than returning
/// a partial answer when the time limit runs out.
pub fn solve_exact_with(
    inst: &ProblemInstance,
    mats: &ModelMatrices,
    cfg: &ExactConfig,
) -> Result<SolveResult, SolverError> {
    let started = Instant::now();
    let deadline = Deadline::new(cfg.time_limit);
    let decoder = Decoder::new(inst, mats);
    let enc = &decoder.encoding;
    let tasks = enc.n_tasks();
    if tasks > cfg.limit {
        return Err(SolverError::TooLarge {
            tasks,
            limit: cfg.limit,
        });
    }

    let perms: Vec<Vec<Vec<usize>>> = enc.slots.iter().map(|s| permutations(&s.zones)).collect();
    let comps: Vec<Vec<Vec<usize>>> = enc
        .slots
        .iter()
        .map(|s| compositions(s.zones.len(), s.robots.len()))
        .collect();
    if comps.iter().any(Vec::is_empty) {
        return Err(SolverError::Infeasible(
            "some task type has zones but no able robot".into(),
        ));
    }

    let n_types = enc.slots.len();
    // odometer digits: (permutation, composition) per type
    let radix: Vec<usize> = (0..n_types)
        .flat_map(|t| [perms[t].len(), comps[t].len()])
        .collect();
    let mut digits = vec![0usize; radix.len()];
    let mut best: Option<(SolutionVector, f64)> = None;
    let mut trace = Vec::new();
    let mut count = 0usize;

    loop {
        let v = SolutionVector {
            orders: (0..n_types).map(|t| perms[t][digits[2 * t]].clone()).collect(),
            workloads: (0..n_types).map(|t| comps[t][digits[2 * t + 1]].clone()).collect(),
        };
        count += 1;
        if let Some(cost) = decoder.evaluate(&v) {
            if best.as_ref().map_or(true, |(_, b)| cost < *b) {
                trace.push(TracePoint {
                    iteration: count,
                    makespan: cost,
                });
                best = Some((v, cost));
            }
        }
        if count % 1024 == 0 && deadline.passed() {
            return Err(SolverError::TimeLimit(deadline.limit()));
        }

        let mut pos = 0;
        loop {
            if pos == digits.len() {
                let (v, _) = best.ok_or_else(|| {
                    SolverError::Infeasible(
                        "every assignment exceeds some robot's maximum runtime".into(),
                    )
                })?;
                return finish(&decoder, v, trace, started);
            }
            digits[pos] += 1;
            if digits[pos] < radix[pos] {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::build_travel_times;
    use crate::instance::tests::one_zone;
    use crate::instance::{generate_instance, reference_robots, GeneratorParams};
    use crate::model::{assemble_matrices, RobustConfig};

    #[test]
    fn counts() {
        assert_eq!(permutations(&[1, 2, 3]).len(), 6);
        assert_eq!(permutations(&[]).len(), 1);
        assert_eq!(permutations(&[4, 5])[1], vec![5, 4]);
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(0, 2), vec![vec![0, 0]]);
        assert!(compositions(1, 0).is_empty());
    }

    #[test]
    fn single_task_pair() {
        let inst = one_zone();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let m = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        let r = solve_exact(&inst, &m, DEFAULT_EXACT_LIMIT).unwrap();
        // 22.5 travel + 2400 vacuum + 960 mop + 22.5 back
        assert!((r.makespan - 3405.0).abs() < 1e-9, "{}", r.makespan);
    }

    #[test]
    fn refuses_large_instances() {
        let inst =
            generate_instance(1, 5, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let m = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        let err = solve_exact(&inst, &m, 8).unwrap_err();
        assert_eq!(err, SolverError::TooLarge { tasks: 10, limit: 8 });
    }
}
