mod common;

use common::{det, load, matrices};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rohyta::instance::generate_scenarios;
use rohyta::model::{lp_model, robust_cleaning_time, LpModel};
use rohyta::schedule::{Decoder, DEFAULT_RETRIES};
use rohyta::solvers::{solve_exact, DEFAULT_EXACT_LIMIT};
use rohyta::{export_lp, RobustConfig, UncertaintySet};

#[test]
fn decoded_schedules_satisfy_the_exported_lp() {
    for name in ["one_zone.toml", "three_zone.toml"] {
        let inst = load(name);
        let mats = det(&inst);
        let model = LpModel::parse(&export_lp(&mats, &inst)).unwrap();
        let dec = Decoder::new(&inst, &mats);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let v = dec.encoding.random_feasible(&mut rng, &mats, DEFAULT_RETRIES).unwrap();
            let sched = dec.decode(&v).unwrap();
            let values = sched.lp_values();
            assert_eq!(model.check(&values, 1e-6), vec![], "{name} {v}");
            assert!((model.objective.evaluate(&values) - sched.makespan).abs() < 1e-6);

            // the makespan row is tight
            let mut lower = values.clone();
            lower.insert("Cmax".into(), sched.makespan - 1e-3);
            assert!(model.check(&lower, 1e-6).iter().any(|r| r.name.starts_with("c2_")));
        }
    }
}

#[test]
fn parsed_lp_matches_the_built_model() {
    let inst = load("three_zone.toml");
    let mats = det(&inst);
    let built = lp_model(&mats);
    let parsed = LpModel::parse(&export_lp(&mats, &inst)).unwrap();
    assert_eq!(parsed.rows.len(), built.rows.len());
    assert_eq!(parsed.n_variables(), built.n_variables());
}

#[test]
fn one_zone_variable_counts() {
    let inst = load("one_zone.toml");
    let m = lp_model(&det(&inst));
    let (n, k) = (3, 2);
    // Y: N K, X: N (N - 1) K plus the idle loop X_0_0_r, U: N, Cmax
    let expected = n * k + (n * (n - 1) + 1) * k + n + 1;
    assert_eq!(m.n_variables(), expected);
}

#[test]
fn robust_optimum_dominates_deterministic() {
    let inst = load("three_zone.toml");
    let base = solve_exact(&inst, &det(&inst), DEFAULT_EXACT_LIMIT).unwrap().makespan;
    let scenarios = generate_scenarios(&inst, 1, 10, 0.1).unwrap();
    let mut previous = base;
    for kind in [UncertaintySet::ConvexHull, UncertaintySet::Box] {
        let mats = matrices(&inst, &RobustConfig::new(kind, scenarios.clone()));
        let r = solve_exact(&inst, &mats, DEFAULT_EXACT_LIMIT).unwrap().makespan;
        assert!(r >= previous, "{kind}: {r} < {previous}");
        previous = r;
    }
    let mats = matrices(&inst, &RobustConfig::new(UncertaintySet::Ellipsoidal, scenarios));
    assert!(solve_exact(&inst, &mats, DEFAULT_EXACT_LIMIT).unwrap().makespan >= base);
}

#[test]
fn ellipsoid_without_scenarios_is_a_config_error() {
    let inst = load("one_zone.toml");
    let t = rohyta::build_travel_times(&inst, &inst.map).unwrap();
    let cfg = RobustConfig::new(UncertaintySet::Ellipsoidal, Default::default());
    assert!(rohyta::assemble_matrices(&inst, &t, &cfg).is_err());
}

fn eval(kind: UncertaintySet, d_bar: f64, devs: &[f64]) -> f64 {
    let cfg = RobustConfig::new(kind, Default::default());
    robust_cleaning_time(d_bar, devs, &cfg).unwrap()
}

proptest! {
    #[test]
    fn transform_ordering_and_scaling(
        d_bar in 0.0f64..5000.0,
        devs in proptest::collection::vec(0.0f64..500.0, 1..12),
        c in 1.0f64..4.0,
    ) {
        let hull = eval(UncertaintySet::ConvexHull, d_bar, &devs);
        let boxed = eval(UncertaintySet::Box, d_bar, &devs);
        let ell = eval(UncertaintySet::Ellipsoidal, d_bar, &devs);
        prop_assert!(boxed >= hull && hull >= d_bar && ell >= d_bar);
        let scaled: Vec<f64> = devs.iter().map(|d| d * c).collect();
        for kind in UncertaintySet::ROBUST {
            prop_assert!(eval(kind, d_bar, &scaled) >= eval(kind, d_bar, &devs));
        }
    }
}
