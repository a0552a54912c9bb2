//! Command implementations. Every command writes into the output directory and
//! prints a short summary; nothing written depends on wall-clock time.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use ccopt_core::instances::{interval_problem, two_group_problem};
use ccopt_core::model::{CcpProblem, SampleSet};
use ccopt_core::solver::{out_of_sample_reliability, BisectionConfig, CcpSolver, Method, OuterRecord, SolveReport, SolveStatus};
use ccopt_core::CcpError;
use ccopt_dispatch::study::{adn_trajectory, solve_built};
use ccopt_dispatch::{build_ccp_with, device_label, fixtures, rho_sweep, BuildOptions, BuiltDispatch, DispatchCase, GroupKind};

use crate::io::{self, num, opt};
use crate::scenarios::{self, ScenarioDistribution, ScenarioGenSpec};
use crate::{method_name, Cli, Command, DispatchArgs, EpsilonOverride, FixtureName, Format, MethodArg, Tolerances};

const EXAMPLE1_METHODS: [Method; 5] = [Method::AlsoXMulti, Method::AlsoXSingle, Method::IntuitiveExtension, Method::CVaR, Method::Oracle];
const SOLVE_METHODS: [Method; 6] =
    [Method::AlsoXMulti, Method::AlsoXSingle, Method::IntuitiveExtension, Method::CVaR, Method::Oracle, Method::MeanScenario];
const DISPATCH_METHODS: [Method; 4] = [Method::AlsoXMulti, Method::IntuitiveExtension, Method::CVaR, Method::MeanScenario];

/// A problem together with one solve of it; the input of `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionBundle {
    pub problem: CcpProblem,
    pub report: SolveReport,
}

pub fn run(cli: &Cli) -> Result<()> {
    let out = &cli.out;
    match &cli.command {
        Command::Example1 { eps, method, tol } => {
            prepare(out, &[])?;
            example1(out, cli.format, eps, *method, tol)
        }
        Command::Example2 { seed, eps1, eps2, tol } => {
            prepare(out, &[])?;
            example2(out, *seed, *eps1, *eps2, tol)
        }
        Command::Solve { problem, method, epsilon, tol } => {
            prepare(out, &[problem])?;
            solve(out, cli.format, problem, *method, epsilon, tol)
        }
        Command::Dispatch { case, run } => {
            prepare(out, &[case])?;
            dispatch(out, cli.format, case, run, false)
        }
        Command::Sweep { case, run } => {
            prepare(out, &[case])?;
            dispatch(out, cli.format, case, run, true)
        }
        Command::Evaluate { report, scenarios } => {
            prepare(out, &[report, scenarios])?;
            evaluate(out, cli.format, report, scenarios)
        }
        Command::Generate { spec } => {
            prepare(out, &[spec])?;
            generate(out, spec)
        }
        Command::Fixture { name, seed, epsilon, n_train, n_test } => {
            prepare(out, &[])?;
            fixture(out, *name, *seed, *epsilon, *n_train, *n_test)
        }
    }
}

fn prepare(out: &Path, inputs: &[&PathBuf]) -> Result<()> {
    for p in inputs {
        ensure!(p.is_file(), "input file {} does not exist", p.display());
    }
    fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))
}

fn write_rows(out: &Path, stem: &str, format: Format, header: &[&str], rows: Vec<Vec<String>>, json: impl Serialize) -> Result<PathBuf> {
    match format {
        Format::Csv => {
            let path = out.join(format!("{stem}.csv"));
            let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
            io::write_table(&path, &header, &rows)?;
            Ok(path)
        }
        Format::Json => {
            let path = out.join(format!("{stem}.json"));
            io::write_json(&path, &json)?;
            Ok(path)
        }
    }
}

fn bisection(tol: &Tolerances, f_lower: f64, f_upper: f64) -> BisectionConfig {
    let mut cfg = BisectionConfig::new(tol.f_lower.unwrap_or(f_lower), tol.f_upper.unwrap_or(f_upper));
    overlay(&mut cfg, tol);
    cfg
}

fn overlay(cfg: &mut BisectionConfig, tol: &Tolerances) {
    if let Some(d) = tol.delta1 {
        cfg.delta1 = d;
    }
    if let Some(d) = tol.delta2 {
        cfg.delta2 = d;
    }
    if let Some(g) = tol.gamma_tol {
        cfg.gamma_tol = g;
    }
}

fn run_method(solver: &CcpSolver, p: &CcpProblem, m: Method, cfg: &BisectionConfig) -> Result<SolveReport, CcpError> {
    match m {
        Method::AlsoXMulti => solver.solve_also_x_multi(p, cfg),
        Method::AlsoXSingle => solver.solve_also_x_single(p, cfg),
        Method::IntuitiveExtension => solver.solve_intuitive_extension(p, cfg),
        Method::CVaR => solver.solve_cvar(p),
        Method::Oracle => solver.solve_oracle(p),
        Method::MeanScenario => solver.solve_mean_scenario(p),
    }
}

fn status_cell(r: &SolveReport) -> String {
    match r.objective {
        Some(v) if r.is_feasible() => num(v),
        _ => "infeasible".into(),
    }
}

#[derive(Serialize)]
struct Example1Row {
    epsilon: f64,
    results: Vec<Example1Cell>,
}

#[derive(Serialize)]
struct Example1Cell {
    method: &'static str,
    status: SolveStatus,
    objective: Option<f64>,
}

fn example1(out: &Path, format: Format, eps: &[f64], method: MethodArg, tol: &Tolerances) -> Result<()> {
    tol.validate()?;
    for e in eps {
        ensure!((0.0..1.0).contains(e), "--eps value {e} outside [0, 1)");
    }
    let methods = method.expand(&EXAMPLE1_METHODS);
    let solver = CcpSolver::default();
    let cfg = bisection(tol, 0.0, 8.0).with_delta1(tol.delta1.unwrap_or(1e-4));
    let mut rows = Vec::new();
    let mut json = Vec::new();
    for &e in eps {
        let p = interval_problem(e);
        let mut row = vec![num(e)];
        let mut cells = Vec::new();
        for &m in &methods {
            let r = run_method(&solver, &p, m, &cfg)?;
            row.push(status_cell(&r));
            cells.push(Example1Cell { method: method_name(m), status: r.status, objective: r.objective.filter(|_| r.is_feasible()) });
        }
        println!("{}", row.join("\t"));
        rows.push(row);
        json.push(Example1Row { epsilon: e, results: cells });
    }
    let mut header = vec!["epsilon"];
    header.extend(methods.iter().map(|m| method_name(*m)));
    let path = write_rows(out, "example1", format, &header, rows, &json)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// 20 scenarios of `[ξ1, ξ2, ξ3, ξ4]`, uniform on `[0, 1)`.
pub fn example2_samples(seed: u64) -> Vec<[f64; 4]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..20).map(|_| [rng.random(), rng.random(), rng.random(), rng.random()]).collect()
}

#[derive(Serialize)]
struct Example2Output<'a> {
    seed: u64,
    epsilon: [f64; 2],
    samples: &'a [[f64; 4]],
    also_x: &'a SolveReport,
    intuitive: &'a SolveReport,
}

fn trace_rows(trace: &[OuterRecord]) -> Vec<Vec<String>> {
    trace
        .iter()
        .enumerate()
        .map(|(k, rec)| {
            let vp = |g: usize| rec.violation_rates.get(g).map(|v| num(*v)).unwrap_or_default();
            vec![(k + 1).to_string(), opt(rec.objective), vp(0), vp(1)]
        })
        .collect()
}

fn example2(out: &Path, seed: u64, eps1: f64, eps2: f64, tol: &Tolerances) -> Result<()> {
    tol.validate()?;
    let xi = example2_samples(seed);
    let p = two_group_problem(&xi, eps1, eps2)?;
    let cfg = bisection(tol, 0.0, 10.0).with_delta1(tol.delta1.unwrap_or(1e-4)).with_delta2(tol.delta2.unwrap_or(1e-4));
    let solver = CcpSolver::default();
    let also_x = solver.solve_also_x_multi(&p, &cfg)?;
    let intuitive = solver.solve_intuitive_extension(&p, &cfg)?;

    let sample_rows: Vec<Vec<f64>> = xi.iter().map(|r| r.to_vec()).collect();
    let header: Vec<String> = (1..=4).map(|j| format!("xi{j}")).collect();
    let body: Vec<Vec<String>> = sample_rows.iter().map(|r| r.iter().map(|v| num(*v)).collect()).collect();
    io::write_table(&out.join("example2_samples.csv"), &header, &body)?;
    let trace_header: Vec<String> = ["iteration", "objective", "vp_group1", "vp_group2"].iter().map(|s| s.to_string()).collect();
    for (name, r) in [("also-x", &also_x), ("intuitive", &intuitive)] {
        io::write_table(&out.join(format!("example2_trace_{name}.csv")), &trace_header, &trace_rows(&r.trace))?;
        let rates: Vec<String> = r.per_group.iter().map(|g| num(g.violation_rate)).collect();
        println!("{name}\tobjective {}\tviolation rates ({})", status_cell(r), rates.join(", "));
    }
    io::write_json(
        &out.join("example2.json"),
        &Example2Output { seed, epsilon: [eps1, eps2], samples: &xi, also_x: &also_x, intuitive: &intuitive },
    )?;
    println!("wrote {}", out.display());
    Ok(())
}

fn apply_problem_epsilon(p: &mut CcpProblem, overrides: &[EpsilonOverride]) -> Result<()> {
    for o in overrides {
        let mut hit = false;
        for g in &mut p.groups {
            if o.target.as_deref().is_none_or(|t| t == g.label) {
                g.epsilon = o.value;
                hit = true;
            }
        }
        if !hit {
            let labels: Vec<&str> = p.groups.iter().map(|g| g.label.as_str()).collect();
            bail!("--epsilon target `{}` matches no group (groups: {})", o.target.as_deref().unwrap_or(""), labels.join(", "));
        }
    }
    Ok(())
}

fn solve_config(solver: &CcpSolver, p: &CcpProblem, m: Method, tol: &Tolerances) -> Result<BisectionConfig> {
    if !matches!(m, Method::AlsoXMulti | Method::AlsoXSingle | Method::IntuitiveExtension) {
        return Ok(BisectionConfig::new(0.0, 0.0));
    }
    let mut cfg = match (tol.f_lower, tol.f_upper) {
        (Some(lo), Some(hi)) => BisectionConfig::new(lo, hi),
        (lo, hi) => {
            let b = solver.init_bounds(p).context("cannot derive bisection bounds; pass --f-lower and --f-upper")?;
            let mut cfg = BisectionConfig::from_bounds(&b);
            if let Some(lo) = lo {
                cfg.f_lower = lo;
            }
            if let Some(hi) = hi {
                cfg.f_upper = hi;
                cfg.upper_witness = None;
            }
            cfg
        }
    };
    overlay(&mut cfg, tol);
    Ok(cfg)
}

fn solve(out: &Path, format: Format, path: &Path, method: MethodArg, epsilon: &[EpsilonOverride], tol: &Tolerances) -> Result<()> {
    tol.validate()?;
    let mut p: CcpProblem = io::read_json(path)?;
    apply_problem_epsilon(&mut p, epsilon)?;
    p.validate().with_context(|| format!("invalid problem {}", path.display()))?;
    let solver = CcpSolver::default();
    let explicit = method != MethodArg::All;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for m in method.expand(&SOLVE_METHODS) {
        if m == Method::AlsoXSingle && p.groups.len() != 1 && !explicit {
            continue;
        }
        let cfg = solve_config(&solver, &p, m, tol)?;
        let report = match run_method(&solver, &p, m, &cfg) {
            Err(e @ CcpError::Capacity { .. }) if !explicit => {
                log::warn!("skipping {}: {e}", method_name(m));
                continue;
            }
            r => r.with_context(|| format!("{} failed", method_name(m)))?,
        };
        let mut row = vec![method_name(m).to_string(), format!("{:?}", report.status), opt(report.objective)];
        row.extend(report.per_group.iter().map(|g| num(g.violation_rate)));
        println!("{}", row.join("\t"));
        rows.push(row);
        let bundle = SolutionBundle { problem: p.clone(), report };
        io::write_json(&out.join(format!("solution_{}.json", method_name(m))), &bundle)?;
        reports.push(bundle.report);
    }
    let mut header = vec!["method".to_string(), "status".into(), "objective".into()];
    header.extend((1..=p.groups.len()).map(|k| format!("vp_group{k}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_rows(out, "summary", format, &header, rows, &reports)?;
    Ok(())
}

fn apply_case_epsilon(case: &mut DispatchCase, overrides: &[EpsilonOverride]) -> Result<()> {
    for o in overrides {
        let t = o.target.as_deref();
        let mut hit = false;
        for (g, gen) in case.generators.iter_mut().enumerate() {
            if t.is_none_or(|t| t == "gen" || t == device_label("gen", &gen.name, g)) {
                gen.epsilon = o.value;
                hit = true;
            }
        }
        for (d, adn) in case.adns.iter_mut().enumerate() {
            if t.is_none_or(|t| t == "adn" || t == device_label("adn", &adn.name, d)) {
                adn.epsilon = o.value;
                hit = true;
            }
        }
        for (l, line) in case.network.lines.iter_mut().enumerate() {
            if t.is_none_or(|t| t == "line" || t == format!("line{l}")) {
                line.epsilon = o.value;
                hit = true;
            }
        }
        if !hit {
            bail!("--epsilon target `{}` matches no generator, ADN or line (use gen, adn, line or a group label)", t.unwrap_or(""));
        }
    }
    Ok(())
}

fn configure_case(path: &Path, run: &DispatchArgs) -> Result<DispatchCase> {
    run.tol.validate()?;
    let mut case = io::load_case(path)?;
    apply_case_epsilon(&mut case, &run.epsilon)?;
    let o = &mut case.options;
    o.f_lower = run.tol.f_lower.or(o.f_lower);
    o.f_upper = run.tol.f_upper.or(o.f_upper);
    o.delta1 = run.tol.delta1.or(o.delta1);
    o.delta2 = run.tol.delta2.or(o.delta2);
    o.gamma_tol = run.tol.gamma_tol.or(o.gamma_tol);
    case.validate()?;
    Ok(case)
}

fn dispatch(out: &Path, format: Format, path: &Path, run: &DispatchArgs, sweep: bool) -> Result<()> {
    let case = configure_case(path, run)?;
    let methods = run.method.expand(&DISPATCH_METHODS);
    if let Some(r) = run.rho {
        ensure!(r.is_finite() && r >= 0.0, "--rho must be ≥ 0");
    }
    if sweep || run.rho_grid.is_some() {
        let grid = run.rho_grid.clone().unwrap_or_else(|| fixtures::RHO_GRID.to_vec());
        return sweep_table(out, format, &case, &grid, &methods);
    }
    for m in methods {
        let built = build_ccp_with(&case, BuildOptions { shared_rho: run.rho })?;
        let outcome = solve_built(&case, &built, m, run.rho).with_context(|| format!("{} failed", method_name(m)))?;
        let name = method_name(m);
        let audit = match &outcome.audit {
            Some(a) if a.passed() => "audits passed".to_string(),
            Some(a) => format!("audits FAILED: {}", a.failures.join("; ")),
            None => "no audit".to_string(),
        };
        println!("{name}\t{:?}\tcost {}\t{audit}", outcome.report.status, opt(outcome.total_cost));
        if let Some(x) = &outcome.report.x_star {
            schedule(out, &case, &built, x, name)?;
            for d in 0..case.adns.len() {
                trajectory(out, &case, &built, x, d, name)?;
            }
        }
        io::write_json(&out.join(format!("dispatch_{name}.json")), &outcome)?;
        let bundle = SolutionBundle { problem: built.problem, report: outcome.report };
        io::write_json(&out.join(format!("solution_{name}.json")), &bundle)?;
    }
    Ok(())
}

fn reliability_of(rel: &Option<Vec<f64>>, kinds: &[GroupKind], pick: impl Fn(&GroupKind) -> bool) -> String {
    let Some(rel) = rel else { return String::new() };
    opt(rel.iter().zip(kinds).filter(|(_, k)| pick(k)).map(|(r, _)| *r).reduce(f64::min))
}

fn sweep_table(out: &Path, format: Format, case: &DispatchCase, grid: &[f64], methods: &[Method]) -> Result<()> {
    let built = build_ccp_with(case, BuildOptions::default())?;
    let kinds = &built.kinds;
    let rows = rho_sweep(case, grid, methods)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.rho),
                method_name(r.method).to_string(),
                format!("{:?}", r.status),
                opt(r.total_cost),
                reliability_of(&r.reliability, kinds, |_| true),
                reliability_of(&r.reliability, kinds, |k| matches!(k, GroupKind::Generator(_))),
                reliability_of(&r.reliability, kinds, |k| matches!(k, GroupKind::Adn(_))),
                reliability_of(&r.reliability, kinds, |k| matches!(k, GroupKind::Line(_))),
                opt(r.objective),
                r.audit_passed.map(|b| b.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    for row in &table {
        println!("{}", row[..5].join("\t"));
    }
    let header = [
        "rho",
        "method",
        "status",
        "cost",
        "reliability",
        "reliability_gen",
        "reliability_adn",
        "reliability_line",
        "objective",
        "audit_passed",
    ];
    let path = write_rows(out, "sweep", format, &header, table, &rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn schedule(out: &Path, case: &DispatchCase, built: &BuiltDispatch, x: &[f64], name: &str) -> Result<()> {
    let mut header = vec!["t".to_string()];
    for (g, gen) in case.generators.iter().enumerate() {
        let l = device_label("gen", &gen.name, g);
        for f in ["p", "r_up", "r_dn", "alpha_plus", "alpha_minus"] {
            header.push(format!("{l}:{f}"));
        }
    }
    for (d, adn) in case.adns.iter().enumerate() {
        let l = device_label("adn", &adn.name, d);
        for f in ["p", "r_up", "alpha_plus"] {
            header.push(format!("{l}:{f}"));
        }
    }
    let rows: Vec<Vec<String>> = (0..case.horizon)
        .map(|t| {
            let mut row = vec![t.to_string()];
            for gi in &built.index.generators {
                for v in [&gi.p, &gi.r_up, &gi.r_dn, &gi.alpha_plus, &gi.alpha_minus] {
                    row.push(num(x[v[t]]));
                }
            }
            for di in &built.index.adns {
                for v in [&di.p, &di.r_up, &di.alpha_plus] {
                    row.push(num(x[v[t]]));
                }
            }
            row
        })
        .collect();
    io::write_table(&out.join(format!("schedule_{name}.csv")), &header, &rows)
}

fn trajectory(out: &Path, case: &DispatchCase, built: &BuiltDispatch, x: &[f64], d: usize, name: &str) -> Result<()> {
    let rows = adn_trajectory(case, built, x, d)?;
    let k = rows.first().map_or(0, |r| r.lower.len());
    let mut header = vec!["t".to_string(), "energy".into(), "energy_plus_reserve".into()];
    for s in 0..k {
        header.push(format!("bound_sample_{s}_lower"));
        header.push(format!("bound_sample_{s}_upper"));
    }
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.t.to_string(), num(r.energy), num(r.energy_plus_reserve)];
            for (lo, hi) in r.lower.iter().zip(&r.upper) {
                row.push(num(*lo));
                row.push(num(*hi));
            }
            row
        })
        .collect();
    let label = device_label("adn", &case.adns[d].name, d).replace(':', "_");
    io::write_table(&out.join(format!("trajectory_{name}_{label}.csv")), &header, &table)
}

#[derive(Debug, Serialize)]
struct Evaluation {
    status: SolveStatus,
    scenarios: usize,
    groups: Vec<GroupEvaluation>,
}

#[derive(Debug, Serialize)]
struct GroupEvaluation {
    label: String,
    epsilon: f64,
    reliability: Option<f64>,
    meets_target: Option<bool>,
}

fn evaluate(out: &Path, format: Format, bundle_path: &Path, csv: &Path) -> Result<()> {
    let bundle: SolutionBundle = io::read_json(bundle_path)?;
    let groups = &bundle.problem.groups;
    let rows = io::read_rows(csv)?;
    ensure!(!rows.is_empty(), "{} holds no scenarios", csv.display());
    let dims: Vec<usize> = groups.iter().map(|g| g.samples.dim()).collect();
    let width: usize = dims.iter().sum();
    let sets: Vec<Arc<SampleSet>> = if rows[0].len() == width {
        let mut start = 0;
        dims.iter()
            .map(|&d| {
                let part: Vec<Vec<f64>> = rows.iter().map(|r| r[start..start + d].to_vec()).collect();
                start += d;
                SampleSet::new(part).map(Arc::new)
            })
            .collect::<Result<_, _>>()
            .with_context(|| format!("invalid scenario file {}", csv.display()))?
    } else if dims.iter().all(|&d| d == rows[0].len()) {
        let shared = Arc::new(SampleSet::new(rows.clone()).with_context(|| format!("invalid scenario file {}", csv.display()))?);
        vec![shared; groups.len()]
    } else {
        bail!(
            "{} has {} columns; expected {width} (group dimensions {dims:?} side by side) or one group dimension shared by all",
            csv.display(),
            rows[0].len()
        );
    };
    let reliability = match &bundle.report.x_star {
        Some(x) => {
            let refs: Vec<&SampleSet> = sets.iter().map(|s| s.as_ref()).collect();
            Some(out_of_sample_reliability(x, groups, &refs)?)
        }
        None => None,
    };
    let evals: Vec<GroupEvaluation> = groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let r = reliability.as_ref().map(|r| r[i]);
            GroupEvaluation { label: g.label.clone(), epsilon: g.epsilon, reliability: r, meets_target: r.map(|r| r >= 1.0 - g.epsilon) }
        })
        .collect();
    let table: Vec<Vec<String>> = evals
        .iter()
        .map(|e| vec![e.label.clone(), num(e.epsilon), opt(e.reliability), e.meets_target.map(|b| b.to_string()).unwrap_or_default()])
        .collect();
    for row in &table {
        println!("{}", row.join("\t"));
    }
    let report = Evaluation { status: bundle.report.status, scenarios: rows.len(), groups: evals };
    write_rows(out, "evaluation", format, &["group", "epsilon", "reliability", "meets_target"], table, &report)?;
    Ok(())
}

fn generate(out: &Path, spec_path: &Path) -> Result<()> {
    let spec: ScenarioGenSpec = io::read_json(spec_path)?;
    let base = spec_path.parent().unwrap_or(Path::new("."));
    let rows = scenarios::generate(&spec, base)?;
    let target = out.join(spec.output.as_deref().unwrap_or(Path::new("scenarios.csv")));
    if let ScenarioDistribution::FromFile { path } = &spec.distribution {
        let src = if path.is_absolute() { path.clone() } else { base.join(path) };
        let header = csv::Reader::from_path(&src)?.headers()?.iter().map(str::to_string).collect::<Vec<_>>();
        let body: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|v| num(*v)).collect()).collect();
        io::write_table(&target, &header, &body)?;
    } else {
        io::write_samples(&target, &rows)?;
    }
    println!("wrote {} scenarios of dimension {} to {}", rows.len(), rows[0].len(), target.display());
    Ok(())
}

fn fixture(out: &Path, name: FixtureName, seed: u64, epsilon: f64, n_train: Option<usize>, n_test: Option<usize>) -> Result<()> {
    ensure!((0.0..1.0).contains(&epsilon), "--epsilon must lie in [0, 1)");
    match name {
        FixtureName::ThreeBus => emit(out, "three_bus.json", &fixtures::three_bus_demo(n_train.unwrap_or(10), n_test.unwrap_or(100), seed)),
        FixtureName::Overlapping => {
            ensure!(n_train.is_none_or(|n| n == 20), "the overlapping fixture always has 20 training scenarios");
            emit(out, "overlapping_boundary.json", &fixtures::overlapping_boundary(n_test.unwrap_or(100), seed))
        }
        FixtureName::Random => {
            ensure!(n_train.is_none() && n_test.is_none(), "random cases choose their own scenario counts");
            emit(out, "random_case.json", &fixtures::random_case(seed))
        }
        FixtureName::Interval => emit(out, "interval_problem.json", &interval_problem(epsilon)),
        FixtureName::TwoGroup => emit(out, "two_group_problem.json", &two_group_problem(&example2_samples(seed), 0.8, 0.2)?),
    }
}

fn emit<T: Serialize>(out: &Path, file: &str, value: &T) -> Result<()> {
    let path = out.join(file);
    io::write_json(&path, value)?;
    println!("wrote {}", path.display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_epsilon_overrides_by_kind_and_label() {
        let mut case = fixtures::three_bus_demo(5, 0, 0);
        let parse = |s: &str| s.parse::<EpsilonOverride>().unwrap();
        apply_case_epsilon(&mut case, &[parse("gen=0.2"), parse("gen:g2=0.3"), parse("line1=0.15")]).unwrap();
        assert_eq!(case.generators[0].epsilon, 0.2);
        assert_eq!(case.generators[1].epsilon, 0.3);
        assert_eq!(case.network.lines[1].epsilon, 0.15);
        assert_eq!(case.network.lines[0].epsilon, 0.1);
        assert!(apply_case_epsilon(&mut case, &[parse("gen:nope=0.2")]).is_err());
        apply_case_epsilon(&mut case, &[parse("0.05")]).unwrap();
        assert_eq!(case.adns[0].epsilon, 0.05);
    }

    #[test]
    fn problem_epsilon_overrides() {
        let mut p = interval_problem(0.0);
        apply_problem_epsilon(&mut p, &["interval=0.4".parse().unwrap()]).unwrap();
        assert_eq!(p.groups[0].epsilon, 0.4);
        assert!(apply_problem_epsilon(&mut p, &["other=0.4".parse().unwrap()]).is_err());
    }
}
