mod common;

use std::collections::HashMap;

use common::{det, load, two_robot_three_zone};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rohyta::gridmap::TravelTimes;
use rohyta::instance::{generate_instance, reference_robots, GeneratorParams};
use rohyta::schedule::{
    check_feasibility, random_solution, Decoder, ScheduleError, ScheduleReport, SolutionVector,
};

#[test]
fn zero_travel_hand_simulation() {
    let inst = two_robot_three_zone();
    let mut mats = det(&inst);
    mats.travel = TravelTimes::zeros(inst.n_tasks(), 2);
    let v: SolutionVector = "2,3,1|3,1,2|3|3".parse().unwrap();
    let makespan = Decoder::new(&inst, &mats).decode(&v).unwrap().makespan;

    let d = |zone: usize, ty: usize, r: usize| mats.cleaning(inst.task_id(zone, ty).unwrap(), r);
    let mut t = 0.0;
    let mut vac_end = HashMap::new();
    for z in [2, 3, 1] {
        t += d(z, 0, 0);
        vac_end.insert(z, t);
    }
    let vac_total = t;
    let mut t: f64 = 0.0;
    for z in [3, 1, 2] {
        t = t.max(vac_end[&z]) + d(z, 1, 1);
    }
    assert_eq!(makespan, vac_total.max(t));
}

#[test]
fn random_vectors_decode_feasibly() {
    for seed in 0..5 {
        let inst =
            generate_instance(seed, 5, 2, &reference_robots(), &GeneratorParams::default()).unwrap();
        let mats = det(&inst);
        let dec = Decoder::new(&inst, &mats);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let v = dec.encoding.random_vector(&mut rng);
            let sched = dec.decode(&v).unwrap();
            let violations = check_feasibility(&sched, &mats);
            let within = dec.encoding.within_runtime(&v, &mats);
            assert!(violations.iter().all(|x| x.constraint == 11), "{violations:?}");
            assert_eq!(violations.is_empty(), within);
        }
    }
}

#[test]
fn capacity_impossible_instance() {
    let inst = load("three_zone.toml");
    let mut mats = det(&inst);
    // every mopping robot's limit is below the smallest single mopping job
    mats.max_runtime[2] = 10.0;
    mats.max_runtime[3] = 10.0;
    let err = random_solution(&inst, 0, &mats).unwrap_err();
    assert!(matches!(err, ScheduleError::Infeasible(_)));
}

#[test]
fn reports_reproduce_their_makespan() {
    let inst = load("three_zone.toml");
    let mats = det(&inst);
    let v = random_solution(&inst, 11, &mats).unwrap();
    let dec = Decoder::new(&inst, &mats);
    let sched = dec.decode(&v).unwrap();
    let report = ScheduleReport::new(&inst, &sched, Some(&v), "sa", 11, "none", 0.0);
    let back = ScheduleReport::from_json(&report.to_json()).unwrap();
    let again = dec.decode(&back.vector.parse().unwrap()).unwrap();
    assert_eq!(again.makespan, back.makespan);
    assert_eq!(back.entries.len(), 6);
}

#[test]
fn different_seeds_give_different_vectors() {
    let inst = load("three_zone.toml");
    let mats = det(&inst);
    let vs: Vec<String> = (0..10)
        .map(|s| random_solution(&inst, s, &mats).unwrap().to_string())
        .collect();
    let distinct: std::collections::HashSet<_> = vs.iter().collect();
    assert!(distinct.len() > 1);
    assert_eq!(vs[3], random_solution(&inst, 3, &mats).unwrap().to_string());
}
