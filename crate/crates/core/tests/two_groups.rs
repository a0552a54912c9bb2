use ccopt_core::instances::two_group_problem;
use ccopt_core::solver::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn samples(seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20).map(|_| [rng.random(), rng.random(), rng.random(), rng.random()]).collect()
}

fn cfg() -> BisectionConfig {
    BisectionConfig::new(0.0, 10.0).with_delta1(1e-4).with_delta2(1e-4)
}

#[test]
fn violation_rates_hit_risk_levels() {
    for seed in 0..10 {
        let p = two_group_problem(&samples(seed), 0.8, 0.2).unwrap();
        let r = solve_also_x_multi(&p, &cfg()).unwrap();
        assert!(r.is_feasible());
        let rates: Vec<f64> = r.per_group.iter().map(|g| g.violation_rate).collect();
        assert_eq!(rates, vec![16.0 / 20.0, 4.0 / 20.0], "seed {seed}");
    }
}

#[test]
fn inner_objective_never_increases() {
    for seed in 0..10 {
        let p = two_group_problem(&samples(seed), 0.8, 0.2).unwrap();
        let r = solve_also_x_multi(&p, &cfg()).unwrap();
        for rec in &r.trace {
            for w in rec.gammas.windows(2) {
                assert!(w[1] <= w[0] + 1e-12, "seed {seed}: {:?}", rec.gammas);
            }
        }
    }
}

#[test]
fn symmetric_groups_stay_symmetric() {
    // identical data and risk levels in both groups
    for seed in 0..3 {
        let xi: Vec<[f64; 4]> = samples(seed).into_iter().map(|r| [r[0], r[1], r[0], r[1]]).collect();
        for eps in [0.2, 0.5, 0.8] {
            let p = two_group_problem(&xi, eps, eps).unwrap();
            let a = solve_also_x_multi(&p, &cfg()).unwrap();
            let b = solve_intuitive_extension(&p, &cfg()).unwrap();
            assert!(a.objective.unwrap() <= b.objective.unwrap() + cfg().delta1, "seed {seed}");
            for r in [&a, &b] {
                assert_eq!(r.per_group[0].violation_rate, r.per_group[1].violation_rate);
            }
        }
    }
}

#[test]
fn report_serializes_with_trace() {
    let p = two_group_problem(&samples(0), 0.8, 0.2).unwrap();
    let r = solve_also_x_multi(&p, &cfg()).unwrap();
    let text = serde_json::to_string(&r).unwrap();
    let back: SolveReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert!(!r.trace.is_empty());
}
