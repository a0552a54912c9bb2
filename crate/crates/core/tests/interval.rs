use ccopt_core::instances::interval_problem;
use ccopt_core::model::evaluate_group;
use ccopt_core::solver::*;

const EPS: [f64; 5] = [0.0, 0.2, 0.4, 0.6, 0.8];
const EXPECTED: [Option<f64>; 5] = [None, None, Some(3.0), Some(2.0), Some(1.0)];

fn cfg() -> BisectionConfig {
    BisectionConfig::new(0.0, 8.0).with_delta1(1e-4)
}

fn check(report: &SolveReport, expected: Option<f64>) {
    match expected {
        None => assert_eq!(report.status, SolveStatus::Infeasible),
        Some(v) => {
            assert_eq!(report.status, SolveStatus::Feasible);
            let obj = report.objective.unwrap();
            assert!((obj - v).abs() <= 1e-4, "objective {obj} vs {v}");
            let x = report.x_star.as_ref().unwrap();
            assert!((obj - x[0]).abs() < 1e-12);
        }
    }
}

#[test]
fn single_and_multi_levels() {
    for (eps, want) in EPS.iter().zip(EXPECTED) {
        let p = interval_problem(*eps);
        check(&solve_also_x_single(&p, &cfg()).unwrap(), want);
        check(&solve_also_x_multi(&p, &cfg()).unwrap(), want);
        check(&solve_also_x_multi(&p, &cfg()).unwrap(), want);
    }
}

#[test]
fn cvar_is_infeasible_everywhere() {
    for eps in EPS {
        let r = solve_cvar(&interval_problem(eps)).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible, "eps {eps}");
    }
}

#[test]
fn oracle_matches() {
    for (eps, want) in EPS.iter().zip(EXPECTED) {
        check(&solve_oracle(&interval_problem(*eps)).unwrap(), want);
    }
}

#[test]
fn relaxation_lp_matches_interval_distance() {
    let p = interval_problem(0.4);
    let SStep::Solved { x, s } = CcpSolver::default().s_step(&p, None, 8.0).unwrap() else {
        panic!("level 8 must be feasible");
    };
    for (i, si) in s[0].iter().enumerate() {
        let (l, u) = (i as f64 + 1.0, i as f64 + 3.0);
        let direct = (l - x[0]).max(x[0] - u).max(0.0);
        assert!((si - direct).abs() < 1e-9);
    }
    // total shortfall is minimized at the middle interval's centre
    assert!((x[0] - 4.0).abs() < 1e-9);
}

#[test]
fn generous_level_succeeds_at_once() {
    let p = interval_problem(0.4);
    let out = CcpSolver::default().inner_alternation(&p, 8.0, &cfg()).unwrap();
    assert_eq!(out.stop, StopReason::GammaZero);
    assert_eq!(out.gammas.len(), 1);
}

#[test]
fn tight_level_fails() {
    let p = interval_problem(0.4);
    let out = CcpSolver::default().inner_alternation(&p, 0.5, &cfg()).unwrap();
    assert!(out.stop == StopReason::LevelInfeasible || out.gamma > 1e-8);
}

#[test]
fn single_rejects_several_groups() {
    let mut p = interval_problem(0.4);
    p.groups.push(p.groups[0].clone());
    assert!(solve_also_x_single(&p, &cfg()).is_err());
}

#[test]
fn bounds_from_mean_scenario() {
    let b = init_bounds(&interval_problem(0.4)).unwrap();
    assert!((b.f_lower - 3.0).abs() < 1e-9);
    assert!((b.f_upper - 6.0).abs() < 1e-9);
    assert!(b.upper_witness.is_none());
}

#[test]
fn training_set_reliability() {
    let p = interval_problem(0.4);
    let g = &p.groups[0];
    let r = out_of_sample_reliability(&[3.0], &p.groups, &[&g.samples]).unwrap();
    assert_eq!(r, vec![0.6]);
    assert_eq!(evaluate_group(g, &[3.0], &g.samples, Some(0.0)).unwrap().satisfied, 3);
}

#[test]
fn identical_scenarios_reduce_to_deterministic() {
    use ccopt_core::model::SampleSet;
    use std::sync::Arc;
    let mut p = interval_problem(0.0);
    p.groups[0].samples = Arc::new(SampleSet::new(vec![vec![2.5, 4.0]; 5]).unwrap());
    let r = solve_also_x_single(&p, &cfg()).unwrap();
    assert!((r.objective.unwrap() - 2.5).abs() <= 1e-4);
}
