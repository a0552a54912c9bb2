use std::time::Instant;

use ccopt_core::solver::{Method, SolveStatus};
use ccopt_dispatch::study::adn_trajectory;
use ccopt_dispatch::{aggregate_errors, build_ccp, fixtures, rho_sweep, solve_dispatch};
use proptest::prelude::*;

fn delta1(f_lower: f64, f_upper: f64) -> f64 {
    1e-4 * (f_lower + f_upper).abs().max(1.0)
}

#[test]
fn radius_sweep_is_monotone_on_the_demo() {
    let case = fixtures::three_bus_demo(10, 100, 0);
    let rows = rho_sweep(&case, &fixtures::RHO_GRID, &[Method::AlsoXMulti]).unwrap();
    let mut prev: Option<f64> = None;
    for r in &rows {
        assert_eq!(r.status, SolveStatus::Feasible, "ρ = {}", r.rho);
        let out = solve_dispatch(&case, Method::AlsoXMulti, Some(r.rho)).unwrap();
        let tol = delta1(out.report.f_lower.unwrap(), out.report.f_upper.unwrap());
        let obj = r.objective.unwrap();
        if let Some(p) = prev {
            assert!(obj >= p - tol, "ρ = {}: {obj} < {p}", r.rho);
        }
        prev = Some(obj);
        for (v, g) in r.in_sample_violation.iter().zip(&out.report.per_group) {
            assert!(*v <= g.epsilon + 1e-12);
        }
    }
}

#[test]
fn overlapping_boundaries_defeat_cvar_only() {
    let case = fixtures::overlapping_boundary(0, 0);
    let rows = rho_sweep(&case, &fixtures::RHO_GRID, &[Method::AlsoXMulti, Method::CVaR]).unwrap();
    for r in rows.iter().filter(|r| r.method == Method::CVaR) {
        assert_eq!(r.status, SolveStatus::Infeasible, "CVaR at ρ = {}", r.rho);
    }
    let first = rows.iter().find(|r| r.method == Method::AlsoXMulti).unwrap();
    assert_eq!(first.rho, fixtures::RHO_GRID[0]);
    assert_eq!(first.status, SolveStatus::Feasible);
    assert_eq!(first.audit_passed, Some(true));
    // the 0.05 MW common window closes once 2ρ exceeds it
    let last = rows.iter().rfind(|r| r.method == Method::AlsoXMulti).unwrap();
    assert_eq!(last.status, SolveStatus::Infeasible);
}

#[test]
fn random_cases_pass_audits() {
    let mut feasible = 0;
    for seed in 0..20 {
        let case = fixtures::random_case(seed);
        for m in [Method::AlsoXMulti, Method::CVaR, Method::MeanScenario] {
            let out = solve_dispatch(&case, m, None).unwrap();
            if let Some(a) = &out.audit {
                assert!(a.passed(), "seed {seed} {m:?}: {:?}", a.failures);
                feasible += 1;
            }
        }
    }
    assert!(feasible >= 30, "only {feasible} feasible dispatches");
}

#[test]
fn demo_solves_quickly() {
    let case = fixtures::three_bus_demo(10, 100, 0);
    let start = Instant::now();
    let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    assert!(out.is_feasible());
    assert!(start.elapsed().as_secs_f64() < 30.0);
}

#[test]
fn sweep_rows_match_sequential_solves() {
    let case = fixtures::three_bus_demo(10, 20, 4);
    let grid = [0.0, 0.02];
    let rows = rho_sweep(&case, &grid, &[Method::AlsoXMulti, Method::CVaR]).unwrap();
    assert_eq!(rows.len(), 4);
    let mut k = 0;
    for &rho in &grid {
        for m in [Method::AlsoXMulti, Method::CVaR] {
            let out = solve_dispatch(&case, m, Some(rho)).unwrap();
            assert_eq!((rows[k].rho, rows[k].method), (rho, m));
            assert_eq!(rows[k].objective, out.report.objective);
            assert_eq!(rows[k].reliability, out.reliability);
            k += 1;
        }
    }
    assert!(rho_sweep(&case, &[], &[Method::CVaR]).is_err());
    assert!(rho_sweep(&case, &[-1.0], &[Method::CVaR]).is_err());
}

#[test]
fn trajectory_tracks_cumulative_energy() {
    let case = fixtures::three_bus_demo(10, 0, 0);
    let built = build_ccp(&case).unwrap();
    let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    let x = out.report.x_star.unwrap();
    let rows = adn_trajectory(&case, &built, &x, 0).unwrap();
    assert_eq!(rows.len(), 4);
    let di = &built.index.adns[0];
    for w in rows.windows(2) {
        let t = w[1].t;
        let d_energy = w[1].energy - w[0].energy;
        let centre_shift = |r: &ccopt_dispatch::study::TrajectoryRow| r.lower[0] - case.adns[0].boundary_samples[0].e_lower[r.t];
        let expected = case.step * x[di.p[t]] + centre_shift(&w[1]) - centre_shift(&w[0]);
        assert!((d_energy - expected).abs() < 1e-9);
        assert!(w[1].energy_plus_reserve >= w[1].energy - 1e-9);
    }
    assert!(adn_trajectory(&case, &built, &x, 3).is_err());
}

proptest! {
    #[test]
    fn aggregates_partition_the_total(rows in prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 6), 1..8)) {
        // 3 farms over 2 periods
        let agg = aggregate_errors(&rows, 3, 2);
        for (i, row) in rows.iter().enumerate() {
            for t in 0..2 {
                let total: f64 = (0..3).map(|w| row[w * 2 + t]).sum();
                let (p, m) = (agg.plus[i][t], agg.minus[i][t]);
                prop_assert!(p >= 0.0 && m <= 0.0);
                prop_assert_eq!(p * m, 0.0);
                prop_assert!((p + m - total).abs() < 1e-12);
            }
        }
    }
}
