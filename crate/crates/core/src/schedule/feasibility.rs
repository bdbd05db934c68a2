use std::fmt;

use super::{runtime_ok, Schedule};
use crate::model::ModelMatrices;

const TOL: f64 = 1e-6;

/// A broken model constraint, numbered as in the LP export (`c<number>_...`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityViolation {
    pub constraint: u8,
    pub message: String,
}

impl fmt::Display for FeasibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint ({}): {}", self.constraint, self.message)
    }
}

fn violation(constraint: u8, message: String) -> FeasibilityViolation {
    FeasibilityViolation {
        constraint,
        message,
    }
}

/// Checks ability, single service, depot start/return, non-overlap,
/// precedence and runtime limits. Empty means feasible.
pub fn check_feasibility(sched: &Schedule, mats: &ModelMatrices) -> Vec<FeasibilityViolation> {
    let n = mats.n_tasks();
    let k = mats.n_robots();
    let mut out = Vec::new();

    if sched.routes.len() != k || sched.returns.len() != k {
        out.push(violation(
            4,
            format!(
                "schedule has {} routes and {} return times for {k} robots",
                sched.routes.len(),
                sched.returns.len()
            ),
        ));
        return out;
    }

    let mut served = vec![0usize; n];
    let mut finish = vec![None; n];
    let mut start = vec![None; n];
    for (r, route) in sched.routes.iter().enumerate() {
        let mut prev_task = 0;
        let mut prev_end = 0.0;
        let mut load = 0.0;
        for e in route {
            if e.robot != r {
                out.push(violation(
                    7,
                    format!("entry for task {} lists robot {} on route {r}", e.task, e.robot),
                ));
            }
            if e.task == 0 || e.task >= n {
                out.push(violation(5, format!("robot {r} serves invalid task {}", e.task)));
                continue;
            }
            served[e.task] += 1;
            finish[e.task] = Some(e.clean_end);
            start[e.task] = Some(e.clean_start);
            if !mats.able(e.task, r) {
                out.push(violation(
                    3,
                    format!("robot {r} cannot perform task {}", e.task),
                ));
            }
            let d = mats.cleaning(e.task, r);
            load += d;
            if (e.clean_end - (e.clean_start + d)).abs() > TOL {
                out.push(violation(
                    9,
                    format!(
                        "task {} on robot {r} lasts {} s, expected {d} s",
                        e.task,
                        e.clean_end - e.clean_start
                    ),
                ));
            }
            let arrival = e.travel_start + mats.travel(prev_task, e.task, r);
            if e.travel_start + TOL < prev_end || e.clean_start + TOL < arrival {
                out.push(violation(
                    9,
                    format!(
                        "robot {r} starts task {} at {} s before finishing task {prev_task} and travelling (ready at {} s)",
                        e.task,
                        e.clean_start,
                        prev_end + mats.travel(prev_task, e.task, r)
                    ),
                ));
            }
            if (e.wait - (e.clean_start - arrival)).abs() > TOL || e.wait < -TOL {
                out.push(violation(
                    9,
                    format!("task {} on robot {r} records an inconsistent wait", e.task),
                ));
            }
            prev_task = e.task;
            prev_end = e.clean_end;
        }
        let back = if route.is_empty() {
            0.0
        } else {
            prev_end + mats.travel(prev_task, 0, r)
        };
        if (sched.returns[r] - back).abs() > TOL {
            out.push(violation(
                6,
                format!(
                    "robot {r} is recorded back at the depot at {} s, expected {back} s",
                    sched.returns[r]
                ),
            ));
        }
        if sched.makespan + TOL < back {
            out.push(violation(
                2,
                format!("makespan {} s ends before robot {r} returns at {back} s", sched.makespan),
            ));
        }
        if !runtime_ok(load, mats.max_runtime[r]) {
            out.push(violation(
                11,
                format!(
                    "robot {r} cleans for {load} s, beyond its maximum runtime {} s",
                    mats.max_runtime[r]
                ),
            ));
        }
    }

    for (task, &count) in served.iter().enumerate().skip(1) {
        if count != 1 {
            out.push(violation(
                5,
                format!("task {task} is served {count} times, expected once"),
            ));
        }
    }

    for i in 1..n {
        for j in 1..n {
            if !mats.precedes(i, j) {
                continue;
            }
            if let (Some(end_i), Some(start_j)) = (finish[i], start[j]) {
                if start_j + TOL < end_i {
                    out.push(violation(
                        10,
                        format!(
                            "task {j} starts at {start_j} s before its predecessor {i} ends at {end_i} s"
                        ),
                    ));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::build_travel_times;
    use crate::instance::tests::one_zone;
    use crate::model::{assemble_matrices, RobustConfig};
    use crate::schedule::{decode, SolutionVector};

    fn setup() -> (crate::instance::ProblemInstance, ModelMatrices, Schedule) {
        let inst = one_zone();
        let t = build_travel_times(&inst, &inst.map).unwrap();
        let mats = assemble_matrices(&inst, &t, &RobustConfig::deterministic()).unwrap();
        let v: SolutionVector = "1|1|1|1".parse().unwrap();
        let s = decode(&v, &mats, &inst).unwrap();
        (inst, mats, s)
    }

    #[test]
    fn decoded_schedule_is_feasible() {
        let (_, mats, s) = setup();
        assert_eq!(check_feasibility(&s, &mats), vec![]);
    }

    #[test]
    fn runtime_overrun() {
        let (_, mut mats, s) = setup();
        mats.max_runtime[0] = 100.0;
        let v = check_feasibility(&s, &mats);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, 11);
    }

    #[test]
    fn task_served_twice() {
        let (_, mats, mut s) = setup();
        let dup = s.routes[0][0];
        s.routes[0].push(shifted(dup, dup.clean_end));
        let v = check_feasibility(&s, &mats);
        assert!(v.iter().any(|v| v.constraint == 5), "{v:?}");
    }

    #[test]
    fn precedence_broken() {
        let (_, mats, mut s) = setup();
        let mop = &mut s.routes[1][0];
        let d = mop.clean_end - mop.clean_start;
        mop.clean_start = 22.5;
        mop.clean_end = 22.5 + d;
        mop.wait = 0.0;
        let v = check_feasibility(&s, &mats);
        assert!(v.iter().any(|v| v.constraint == 10), "{v:?}");
    }

    #[test]
    fn wrong_robot_for_task() {
        let (_, mats, mut s) = setup();
        let entry = s.routes[0].remove(0);
        s.routes[1].insert(
            0,
            crate::schedule::ScheduleEntry {
                robot: 1,
                ..entry
            },
        );
        let v = check_feasibility(&s, &mats);
        assert!(v.iter().any(|v| v.constraint == 3), "{v:?}");
    }

    fn shifted(e: crate::schedule::ScheduleEntry, at: f64) -> crate::schedule::ScheduleEntry {
        let d = e.clean_end - e.clean_start;
        crate::schedule::ScheduleEntry {
            travel_start: at,
            clean_start: at,
            clean_end: at + d,
            wait: 0.0,
            ..e
        }
    }
}
