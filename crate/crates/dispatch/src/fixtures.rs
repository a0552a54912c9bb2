//! Seeded case generators. Training scenarios use `ChaCha8Rng::seed_from_u64(seed)`,
//! held-out scenarios `ChaCha8Rng::seed_from_u64(seed ^ TEST_SEED_OFFSET)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::case::{Adn, BoundarySample, Bus, CaseOptions, DispatchCase, Generator, Line, Network, Preset, WindFarm, WindScenarioSet};

pub const TEST_SEED_OFFSET: u64 = 0x7E57_0000_0000_0000;

/// Radius grid used by the bundled sweep studies.
pub const RHO_GRID: [f64; 4] = [0.0, 1e-3, 1e-2, 5e-2];

/// Gaussian forecast errors with standard deviation `sigma_frac · forecast`.
pub fn wind_errors(farms: &[WindFarm], sigma_frac: f64, n: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            farms
                .iter()
                .flat_map(|f| f.forecast.iter().map(|&p| p * sigma_frac).collect::<Vec<_>>())
                .map(|sd| if sd > 0.0 { Normal::new(0.0, sd).expect("finite sd").sample(rng) } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Boundary band `[lo, hi]` on power with uniform jitter of `±jitter`, and
/// energy limits from the prefix sums of a slightly tightened band.
pub fn boundary_samples(lo: &[f64], hi: &[f64], jitter: f64, step: f64, n: usize, rng: &mut impl Rng) -> Vec<BoundarySample> {
    (0..n)
        .map(|_| {
            let mut p_lower = Vec::with_capacity(lo.len());
            let mut p_upper = Vec::with_capacity(lo.len());
            for (&a, &b) in lo.iter().zip(hi) {
                let shift = rng.random_range(-jitter..=jitter);
                let spread = rng.random_range(0.0..=jitter);
                p_lower.push(a + shift + spread);
                p_upper.push(b + shift - spread);
            }
            let mut e_lower = Vec::with_capacity(lo.len());
            let mut e_upper = Vec::with_capacity(lo.len());
            let (mut el, mut eu) = (0.0, 0.0);
            for t in 0..lo.len() {
                let width = p_upper[t] - p_lower[t];
                el += step * (p_lower[t] + 0.2 * width);
                eu += step * (p_upper[t] - 0.2 * width);
                e_lower.push(el);
                e_upper.push(eu);
            }
            BoundarySample { p_lower, p_upper, e_lower, e_upper }
        })
        .collect()
}

fn bus(load: &[f64]) -> Bus {
    Bus { name: String::new(), load: load.to_vec() }
}

fn line(from: usize, to: usize, capacity: f64) -> Line {
    Line { from, to, reactance: Some(0.1), capacity, epsilon: 0.1, rho: 0.0 }
}

#[allow(clippy::too_many_arguments)]
fn generator(name: &str, bus: usize, p_min: f64, segments: &[(f64, f64)], ramp: f64, fixed: f64, up: f64, dn: f64) -> Generator {
    let width: f64 = segments.iter().map(|s| s.0).sum();
    Generator {
        name: name.into(),
        bus,
        p_min,
        p_max: p_min + width,
        ramp_dn: -ramp,
        ramp_up: ramp,
        segments: segments.to_vec(),
        fixed_cost: fixed,
        reserve_cost_up: up,
        reserve_cost_dn: dn,
        epsilon: 0.05,
        rho: 0.0,
    }
}

fn three_bus_network() -> Network {
    Network {
        buses: vec![bus(&[40.0, 42.0, 45.0, 43.0]), bus(&[30.0, 31.0, 33.0, 32.0]), bus(&[22.0, 23.0, 25.0, 24.0])],
        lines: vec![line(0, 1, 45.0), line(1, 2, 40.0), line(0, 2, 30.0)],
        ptdf: None,
        slack: 0,
    }
}

fn three_bus_generators() -> Vec<Generator> {
    vec![
        generator("g1", 0, 10.0, &[(30.0, 20.0), (30.0, 25.0), (30.0, 32.0)], 200.0, 100.0, 5.0, 4.0),
        generator("g2", 1, 5.0, &[(20.0, 18.0), (20.0, 28.0), (15.0, 40.0)], 150.0, 80.0, 6.0, 5.0),
    ]
}

fn three_bus_wind() -> Vec<WindFarm> {
    vec![WindFarm { name: "w1".into(), bus: 2, forecast: vec![30.0, 32.0, 28.0, 31.0] }]
}

/// Three buses in a triangle, two generators, one ADN and one wind farm over
/// the intraday horizon (`T = 4`, `ΔT = 0.25 h`). Generator and ADN risk
/// levels are 0.1, so one of ten training scenarios may be violated.
pub fn three_bus_demo(n_train: usize, n_test: usize, seed: u64) -> DispatchCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_rng = ChaCha8Rng::seed_from_u64(seed ^ TEST_SEED_OFFSET);
    let farms = three_bus_wind();
    let lo = [6.0, 7.0, 8.0, 7.0];
    let hi = [22.0, 24.0, 25.0, 23.0];
    let errors = wind_errors(&farms, 0.15, n_train, &mut rng);
    let samples = boundary_samples(&lo, &hi, 1.5, 0.25, n_train, &mut rng);
    let test_errors = wind_errors(&farms, 0.15, n_test, &mut test_rng);
    let test_samples = boundary_samples(&lo, &hi, 1.5, 0.25, n_test, &mut test_rng);
    DispatchCase {
        name: "three-bus demo".into(),
        horizon: 4,
        step: 0.25,
        network: three_bus_network(),
        generators: three_bus_generators().into_iter().map(|g| Generator { epsilon: 0.1, ..g }).collect(),
        adns: vec![Adn {
            name: "d1".into(),
            bus: 2,
            boundary_samples: samples,
            boundary_csv: None,
            test_boundary_samples: test_samples,
            test_boundary_csv: None,
            reserve_cost_up: 7.0,
            epsilon: 0.1,
            rho: 0.0,
        }],
        wind: WindScenarioSet { farms, errors, errors_csv: None, test_errors, test_errors_csv: None },
        options: CaseOptions { preset: Preset::Intraday, ..CaseOptions::default() },
    }
}

/// The three-bus system with 20 ADN power bands staggered by 0.1 MW so that
/// any 19 of them intersect in a 0.05 MW window but all 20 do not.
pub fn overlapping_boundary(n_test: usize, seed: u64) -> DispatchCase {
    let n = 20;
    let mut case = three_bus_demo(n, n_test, seed);
    let stagger = |i: usize| -> BoundarySample {
        let lower: Vec<f64> = (0..4).map(|_| 8.0 + 0.1 * i as f64).collect();
        let upper: Vec<f64> = lower.iter().map(|v| v + 1.85).collect();
        let e_upper: Vec<f64> = (1..=4).map(|t| 0.25 * 30.0 * t as f64).collect();
        BoundarySample { p_lower: lower, p_upper: upper, e_lower: vec![0.0; 4], e_upper }
    };
    for g in &mut case.generators {
        g.epsilon = 0.05;
    }
    let adn = &mut case.adns[0];
    adn.epsilon = 0.05;
    adn.name = "staggered".into();
    adn.boundary_samples = (0..n).map(stagger).collect();
    adn.test_boundary_samples = (0..n_test).map(|i| stagger(i % n)).collect();
    case.name = "overlapping ADN boundaries".into();
    case
}

/// Small random system for audits: 2–4 buses on a path plus an optional
/// closing line, 1–3 generators, up to one ADN and up to two wind farms.
pub fn random_case(seed: u64) -> DispatchCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizon = rng.random_range(1..=4);
    let step = [0.25, 0.5, 1.0][rng.random_range(0..3)];
    let nb = rng.random_range(2..=4);
    let n = rng.random_range(5..=10);
    let profile = |rng: &mut ChaCha8Rng, base: f64| -> Vec<f64> { (0..horizon).map(|_| base * rng.random_range(0.9..1.1)).collect() };

    let buses: Vec<Bus> = (0..nb)
        .map(|_| {
            let base = rng.random_range(5.0..20.0);
            Bus { name: String::new(), load: profile(&mut rng, base) }
        })
        .collect();
    let total_load: f64 = buses.iter().map(|b| b.load.iter().cloned().fold(0.0, f64::max)).sum();
    let mut lines: Vec<Line> = (1..nb).map(|i| line(i - 1, i, total_load * rng.random_range(0.6..1.2))).collect();
    if nb > 2 && rng.random_bool(0.5) {
        lines.push(line(nb - 1, 0, total_load * rng.random_range(0.6..1.2)));
    }
    for l in &mut lines {
        l.reactance = Some(rng.random_range(0.05..0.3));
        l.epsilon = [0.1, 0.2][rng.random_range(0..2)];
    }

    let ng = rng.random_range(1..=3);
    let generators: Vec<Generator> = (0..ng)
        .map(|g| {
            let k = rng.random_range(1..=3);
            let mut cost = rng.random_range(10.0..20.0);
            let segments: Vec<(f64, f64)> = (0..k)
                .map(|_| {
                    cost += rng.random_range(1.0..8.0);
                    (total_load * rng.random_range(1.2..2.0) / (k * ng) as f64, cost)
                })
                .collect();
            let mut gen = generator(
                &format!("g{g}"),
                rng.random_range(0..nb),
                rng.random_range(0.0..5.0),
                &segments,
                total_load * rng.random_range(1.0..4.0),
                rng.random_range(0.0..50.0),
                rng.random_range(2.0..8.0),
                rng.random_range(2.0..8.0),
            );
            gen.epsilon = [0.1, 0.2][rng.random_range(0..2)];
            gen
        })
        .collect();

    let farms: Vec<WindFarm> = (0..rng.random_range(0..=2))
        .map(|w| WindFarm { name: format!("w{w}"), bus: rng.random_range(0..nb), forecast: profile(&mut rng, 0.2 * total_load) })
        .collect();
    let errors = wind_errors(&farms, 0.1, n, &mut rng);

    let adns = if rng.random_bool(0.5) {
        let lo = profile(&mut rng, 0.05 * total_load);
        let hi: Vec<f64> = lo.iter().map(|v| v + 0.2 * total_load).collect();
        vec![Adn {
            name: "d0".into(),
            bus: rng.random_range(0..nb),
            boundary_samples: boundary_samples(&lo, &hi, 0.02 * total_load, step, n, &mut rng),
            boundary_csv: None,
            test_boundary_samples: Vec::new(),
            test_boundary_csv: None,
            reserve_cost_up: rng.random_range(2.0..8.0),
            epsilon: 0.2,
            rho: 0.0,
        }]
    } else {
        Vec::new()
    };
    let rho = if rng.random_bool(0.3) { 0.01 } else { 0.0 };
    let mut case = DispatchCase {
        name: format!("random {seed}"),
        horizon,
        step,
        network: Network { buses, lines, ptdf: None, slack: 0 },
        generators,
        adns,
        wind: WindScenarioSet { farms, errors, ..WindScenarioSet::default() },
        options: CaseOptions::default(),
    };
    for g in &mut case.generators {
        g.rho = rho;
    }
    // some cases have neither wind nor ADN scenarios
    if case.wind.farms.is_empty() && case.adns.is_empty() {
        case.wind.errors.clear();
    }
    case
}
