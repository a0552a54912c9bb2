//! Ordering of the exact optimum and the approximations on random instances.

use ccopt_core::instances::random_instance;
use ccopt_core::solver::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Bounds from the mean-scenario problem, or from the variable box when that is infeasible.
fn config_for(p: &ccopt_core::model::CcpProblem) -> BisectionConfig {
    match init_bounds(p) {
        Ok(b) => BisectionConfig::from_bounds(&b),
        Err(_) => {
            let lo: f64 = p.objective.iter().map(|c| (c * 10.0).min(0.0)).sum();
            let hi: f64 = p.objective.iter().map(|c| (c * 10.0).max(0.0)).sum();
            BisectionConfig::new(lo, hi)
        }
    }
}

#[test]
fn oracle_below_multi_below_intuitive_and_cvar() {
    let mut cvar_feasible = 0;
    for seed in 0..50 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let p = random_instance(&mut || rng.random::<f64>());
        let cfg = config_for(&p);
        let multi = solve_also_x_multi(&p, &cfg).unwrap();
        let intuitive = solve_intuitive_extension(&p, &cfg).unwrap();
        let cvar = solve_cvar(&p).unwrap();
        let oracle = solve_oracle(&p).unwrap();
        let tol = 1e-6;
        if cvar.is_feasible() {
            cvar_feasible += 1;
            assert!(multi.is_feasible(), "seed {seed}: CVaR feasible but multi not");
            assert!(multi.objective.unwrap() <= cvar.objective.unwrap() + cfg.delta1, "seed {seed}");
        }
        if multi.is_feasible() {
            for g in &multi.per_group {
                assert!(g.violation_rate <= g.epsilon + 1e-12, "seed {seed}: {g:?}");
            }
            assert!(oracle.objective.unwrap() <= multi.objective.unwrap() + tol, "seed {seed}");
        }
        if multi.is_feasible() && intuitive.is_feasible() {
            assert!(multi.objective.unwrap() <= intuitive.objective.unwrap() + tol, "seed {seed}");
        }
    }
    assert!(cvar_feasible >= 20, "only {cvar_feasible} CVaR-feasible instances");
}

#[test]
fn cvar_is_not_below_multi_and_grows_with_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..20 {
        let mut p = random_instance(&mut || rng.random::<f64>());
        p.groups.iter_mut().for_each(|g| g.rho = 0.0);
        let flat = solve_cvar(&p).unwrap();
        p.groups.iter_mut().for_each(|g| g.rho = 0.1);
        let robust = solve_cvar(&p).unwrap();
        if let (Some(a), Some(b)) = (flat.objective, robust.objective) {
            assert!(b >= a - 1e-9);
            checked += 1;
        }
    }
    assert!(checked > 5);
}

#[test]
fn relaxations_grow_with_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let solver = CcpSolver::default();
    for _ in 0..20 {
        let mut p = random_instance(&mut || rng.random::<f64>());
        p.groups.iter_mut().for_each(|g| g.rho = 0.0);
        let f = config_for(&p).f_lower;
        let SStep::Solved { x, .. } = solver.s_step(&p, None, f).unwrap() else { continue };
        // the same point evaluated with and without radius
        let flat: Vec<f64> =
            p.groups.iter().flat_map(|g| ccopt_core::model::evaluate_group(g, &x, &g.samples, None).unwrap().worst).collect();
        let robust: Vec<f64> =
            p.groups.iter().flat_map(|g| ccopt_core::model::evaluate_group(g, &x, &g.samples, Some(0.1)).unwrap().worst).collect();
        for (a, b) in flat.iter().zip(&robust) {
            assert!(b.max(0.0) >= a.max(0.0) - 1e-9);
        }
        // paired relaxation LPs
        let SStep::Solved { s: s0, .. } = solver.s_step(&p, None, f + 1.0).unwrap() else { continue };
        p.groups.iter_mut().for_each(|g| g.rho = 0.1);
        let SStep::Solved { s: s1, .. } = solver.s_step(&p, None, f + 1.0).unwrap() else { continue };
        let sum = |s: &Vec<Vec<f64>>| s.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).sum::<f64>();
        assert!(sum(&s1) >= sum(&s0) - 1e-9);
    }
}

#[test]
fn oracle_capacity_guard() {
    use ccopt_core::instances::two_group_problem;
    let xi: Vec<[f64; 4]> = (0..20).map(|i| [i as f64 / 20.0; 4]).collect();
    let p = two_group_problem(&xi, 0.5, 0.5).unwrap();
    assert!(matches!(solve_oracle(&p), Err(ccopt_core::CcpError::Capacity { .. })));
}
