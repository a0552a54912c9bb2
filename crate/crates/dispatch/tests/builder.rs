use ccopt_core::solver::{init_bounds, Method};
use ccopt_dispatch::build::{adn_scenario, generator_scenario, line_scenario};
use ccopt_dispatch::case::{Bus, CaseOptions, Line, Network, WindFarm};
use ccopt_dispatch::{
    aggregate_errors, build_ccp, deterministic_dispatch, fixtures, solve_dispatch, Adn, BoundarySample, DispatchCase, Generator, GroupKind,
    WindScenarioSet,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn single_bus(load: f64) -> DispatchCase {
    DispatchCase {
        name: String::new(),
        horizon: 1,
        step: 1.0,
        network: Network { buses: vec![Bus { name: String::new(), load: vec![load] }], lines: vec![], ptdf: None, slack: 0 },
        generators: vec![Generator {
            name: "g".into(),
            bus: 0,
            p_min: 0.0,
            p_max: 100.0,
            ramp_dn: -50.0,
            ramp_up: 50.0,
            segments: vec![(50.0, 10.0), (50.0, 20.0)],
            fixed_cost: 5.0,
            reserve_cost_up: 3.0,
            reserve_cost_dn: 2.0,
            epsilon: 0.05,
            rho: 0.0,
        }],
        adns: vec![],
        wind: WindScenarioSet::default(),
        options: CaseOptions::default(),
    }
}

#[test]
fn single_generator_covers_the_load() {
    let case = single_bus(70.0);
    let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    let built = build_ccp(&case).unwrap();
    let x = out.report.x_star.as_ref().unwrap();
    assert!((x[built.index.generators[0].p[0]] - 70.0).abs() < 1e-9);
    // 50 MW at 10 plus 20 MW at 20, plus the fixed cost
    assert!((out.total_cost.unwrap() - (500.0 + 400.0 + 5.0)).abs() < 1e-6);
    assert!(out.audit.unwrap().passed());
}

#[test]
fn zero_errors_need_no_reserve() {
    let mut case = fixtures::three_bus_demo(10, 0, 3);
    for row in &mut case.wind.errors {
        row.iter_mut().for_each(|v| *v = 0.0);
    }
    for s in &mut case.adns[0].boundary_samples {
        s.p_lower = vec![-50.0; 4];
        s.p_upper = vec![80.0; 4];
        s.e_lower = vec![-100.0; 4];
        s.e_upper = vec![100.0; 4];
    }
    let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    let built = build_ccp(&case).unwrap();
    let x = out.report.x_star.unwrap();
    let idx = &built.index;
    let reserve: f64 =
        idx.generators.iter().flat_map(|g| g.r_up.iter().chain(&g.r_dn)).chain(idx.adns.iter().flat_map(|d| &d.r_up)).map(|&j| x[j]).sum();
    assert!(reserve.abs() < 1e-9, "reserve {reserve}");
    let det = deterministic_dispatch(&case).unwrap();
    assert!((det.objective.unwrap() - out.report.objective.unwrap()).abs() < 1e-6);
}

#[test]
fn demo_case_passes_the_audits() {
    let case = fixtures::three_bus_demo(10, 100, 0);
    let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    assert!(out.is_feasible());
    let audit = out.audit.unwrap();
    assert!(audit.passed(), "{:?}", audit.failures);
    assert!(audit.balance_residual <= 1e-6);
    assert!(audit.alpha_plus_residual <= 1e-9 && audit.alpha_minus_residual <= 1e-9);
    for g in &out.report.per_group {
        assert!(g.violation_rate <= g.epsilon + 1e-12, "{}", g.label);
    }
    assert_eq!(out.reliability.unwrap().len(), out.group_labels.len());
}

#[test]
fn mean_scenario_bounds_feed_the_bisection() {
    let case = fixtures::three_bus_demo(10, 0, 0);
    let built = build_ccp(&case).unwrap();
    let det = deterministic_dispatch(&case).unwrap();
    let bounds = init_bounds(&built.problem).unwrap();
    assert_eq!(det.objective.unwrap(), bounds.f_lower);
    let also = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    let first = also.report.trace.first().unwrap().level;
    assert_eq!(first, 0.5 * (bounds.f_lower + bounds.f_upper));
}

#[test]
fn mean_scenario_is_optimistic() {
    for seed in 0..5 {
        let case = fixtures::three_bus_demo(10, 0, seed);
        let det = deterministic_dispatch(&case).unwrap().objective.unwrap();
        let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
        let delta1 = 1e-4 * (out.report.f_lower.unwrap() + out.report.f_upper.unwrap()).abs().max(1.0);
        assert!(det <= out.report.objective.unwrap() + delta1, "seed {seed}");
    }
}

#[test]
fn invalid_inputs_are_model_errors() {
    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.generators[0].epsilon = 1.0;
    assert!(build_ccp(&case).unwrap_err().to_string().contains("risk level"));

    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.adns[0].rho = -0.1;
    assert!(build_ccp(&case).is_err());

    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.adns[0].boundary_samples.pop();
    assert!(build_ccp(&case).unwrap_err().to_string().contains("boundary samples"));

    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.network.lines[1].reactance = None;
    assert!(build_ccp(&case).unwrap_err().to_string().contains("ptdf"));

    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.network.buses[2].load.push(1.0);
    assert!(build_ccp(&case).is_err());

    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.generators[1].ramp_dn = 10.0;
    assert!(build_ccp(&case).unwrap_err().to_string().contains("ramp"));

    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.generators[1].segments[0].0 += 1.0;
    assert!(build_ccp(&case).unwrap_err().to_string().contains("widths"));
}

#[test]
fn generated_errors_are_complementary() {
    for seed in 0..20 {
        let case = fixtures::random_case(seed);
        let agg = aggregate_errors(&case.wind_rows(), case.wind.farms.len(), case.horizon);
        for (p, m) in agg.plus.iter().zip(&agg.minus) {
            for (a, b) in p.iter().zip(m) {
                assert!(*a >= 0.0 && *b <= 0.0 && a * b == 0.0);
            }
        }
    }
}

/// The energy families carry `ΔT` on every earlier period and nothing later.
#[test]
fn energy_rows_are_prefix_sums() {
    let case = fixtures::three_bus_demo(10, 0, 0);
    let built = build_ccp(&case).unwrap();
    let l = built.kinds.iter().position(|k| *k == GroupKind::Adn(0)).unwrap();
    let g = &built.problem.groups[l];
    let di = &built.index.adns[0];
    let nt = case.horizon;
    for t in 0..nt {
        let lower = &g.constraints[5 * t + 1].b;
        let upper = &g.constraints[5 * t + 3].b;
        for tau in 0..nt {
            let coef = |terms: &[(usize, f64)], j: usize| terms.iter().filter(|(k, _)| *k == j).map(|(_, c)| c).sum::<f64>();
            let expect = if tau <= t { case.step } else { 0.0 };
            assert_eq!(coef(&lower.terms, di.p[tau]), -expect);
            assert_eq!(coef(&upper.terms, di.p[tau]), expect);
            assert_eq!(coef(&upper.terms, di.r_up[tau]), expect);
        }
    }
}

/// Group constraints evaluated through the bi-affine form agree with the
/// dispatch formulas written out from the raw case data.
#[test]
fn bi_affine_matches_direct_formulas() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let case = fixtures::three_bus_demo(10, 0, 5);
    let built = build_ccp(&case).unwrap();
    let idx = &built.index;
    let nt = case.horizon;
    let dt = case.step;
    for _ in 0..100 {
        let x: Vec<f64> = (0..idx.num_vars).map(|_| rng.random_range(-5.0..40.0)).collect();
        let wind: Vec<f64> = (0..case.wind.farms.len() * nt).map(|_| rng.random_range(-8.0..8.0)).collect();
        let boundary = BoundarySample {
            p_lower: (0..nt).map(|_| rng.random_range(0.0..10.0)).collect(),
            p_upper: (0..nt).map(|_| rng.random_range(10.0..30.0)).collect(),
            e_lower: (0..nt).map(|_| rng.random_range(0.0..5.0)).collect(),
            e_upper: (0..nt).map(|_| rng.random_range(5.0..20.0)).collect(),
        };
        let total: Vec<f64> = (0..nt).map(|t| (0..case.wind.farms.len()).map(|w| wind[w * nt + t]).sum()).collect();
        let op: Vec<f64> = total.iter().map(|v| v.max(0.0)).collect();
        let om: Vec<f64> = total.iter().map(|v| v.min(0.0)).collect();
        let agg = aggregate_errors(std::slice::from_ref(&wind), case.wind.farms.len(), nt);

        for (l, kind) in built.kinds.iter().enumerate() {
            let group = &built.problem.groups[l];
            let (xi, expected): (Vec<f64>, Vec<f64>) = match *kind {
                GroupKind::Generator(g) => {
                    let gi = &idx.generators[g];
                    let v = (0..nt)
                        .flat_map(|t| [x[gi.alpha_minus[t]] * op[t] - x[gi.r_dn[t]], -x[gi.alpha_plus[t]] * om[t] - x[gi.r_up[t]]])
                        .collect();
                    (generator_scenario(&agg, 0), v)
                }
                GroupKind::Adn(d) => {
                    let di = &idx.adns[d];
                    let b = &boundary;
                    let v = (0..nt)
                        .flat_map(|t| {
                            let e: f64 = (0..=t).map(|k| x[di.p[k]] * dt).sum();
                            let er: f64 = (0..=t).map(|k| (x[di.p[k]] + x[di.r_up[k]]) * dt).sum();
                            [
                                b.p_lower[t] - x[di.p[t]],
                                b.e_lower[t] - e,
                                x[di.p[t]] + x[di.r_up[t]] - b.p_upper[t],
                                er - b.e_upper[t],
                                x[di.alpha_plus[t]] * op[t] - x[di.r_up[t]],
                            ]
                        })
                        .collect();
                    (adn_scenario(&agg, b, 0), v)
                }
                GroupKind::Line(li) => {
                    let psi = &built.ptdf[li];
                    let cap = case.network.lines[li].capacity;
                    let v = (0..nt)
                        .flat_map(|t| {
                            let mut inj = vec![0.0; case.num_buses()];
                            for (gen, gi) in case.generators.iter().zip(&idx.generators) {
                                inj[gen.bus] += x[gi.p[t]] - x[gi.alpha_minus[t]] * op[t] - x[gi.alpha_plus[t]] * om[t];
                            }
                            for (w, farm) in case.wind.farms.iter().enumerate() {
                                inj[farm.bus] += farm.forecast[t] + wind[w * nt + t];
                            }
                            for (adn, di) in case.adns.iter().zip(&idx.adns) {
                                inj[adn.bus] -= x[di.p[t]] + x[di.alpha_plus[t]] * op[t];
                            }
                            for (i, bus) in case.network.buses.iter().enumerate() {
                                inj[i] -= bus.load[t];
                            }
                            let flow: f64 = psi.iter().zip(&inj).map(|(a, b)| a * b).sum();
                            [flow - cap, -flow - cap]
                        })
                        .collect();
                    (line_scenario(&agg, &wind, 0), v)
                }
            };
            assert_eq!(group.constraints.len(), expected.len());
            for (c, e) in group.constraints.iter().zip(&expected) {
                let got = c.eval(&x, &xi);
                assert!((got - e).abs() <= 1e-10 * (1.0 + e.abs()), "{}: {got} vs {e}", group.label);
            }
        }
    }
}

#[test]
fn reversed_down_capacity_is_selectable() {
    let mut case = fixtures::three_bus_demo(10, 0, 0);
    case.options.down_capacity = ccopt_dispatch::case::DownCapacity::Reversed;
    let built = build_ccp(&case).unwrap();
    let gi = &built.index.generators[0];
    let row = built.problem.polytope.constraints.iter().find(|c| c.terms == vec![(gi.p[0], 1.0), (gi.r_dn[0], -1.0)]).unwrap();
    assert_eq!(row.sense, ccopt_core::model::Sense::Le);
}

#[test]
fn case_json_round_trips() {
    let case = fixtures::overlapping_boundary(5, 2);
    let text = serde_json::to_string_pretty(&case).unwrap();
    let back: DispatchCase = serde_json::from_str(&text).unwrap();
    assert_eq!(back, case);
}

#[test]
fn explicit_ptdf_overrides_reactances() {
    let mut case = fixtures::three_bus_demo(10, 0, 0);
    let computed = build_ccp(&case).unwrap().ptdf;
    case.network.ptdf = Some(computed.clone());
    for l in &mut case.network.lines {
        l.reactance = None;
    }
    assert_eq!(build_ccp(&case).unwrap().ptdf, computed);
}

#[test]
fn adns_without_wind_use_their_own_scenario_count() {
    let mut case = single_bus(40.0);
    case.network.buses.push(Bus { name: String::new(), load: vec![0.0] });
    case.network.lines.push(Line { from: 0, to: 1, reactance: Some(0.1), capacity: 100.0, epsilon: 0.1, rho: 0.0 });
    case.wind.farms.push(WindFarm { name: String::new(), bus: 1, forecast: vec![0.0] });
    let band = |lo: f64| BoundarySample { p_lower: vec![lo], p_upper: vec![lo + 5.0], e_lower: vec![0.0], e_upper: vec![100.0] };
    case.adns.push(Adn {
        name: String::new(),
        bus: 1,
        boundary_samples: (0..4).map(|i| band(i as f64)).collect(),
        boundary_csv: None,
        test_boundary_samples: vec![],
        test_boundary_csv: None,
        reserve_cost_up: 1.0,
        epsilon: 0.25,
        rho: 0.0,
    });
    let out = solve_dispatch(&case, Method::AlsoXMulti, None).unwrap();
    assert!(out.is_feasible());
    assert_eq!(case.num_scenarios(), 4);
}
