//! Compiles a [`DispatchCase`] into a [`CcpProblem`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::case::{DispatchCase, DownCapacity};
use crate::ptdf::resolve_ptdf;
use ccopt_core::model::{AffineExpr, BiAffineConstraint, CcpProblem, JccGroup, LinearConstraint, Polytope, SampleSet, Sense, VarBound};
use ccopt_core::{CcpError, Result};

/// Column indices of one generator's variables, `[t]` (segments `[s][t]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenIndex {
    pub segments: Vec<Vec<usize>>,
    pub p: Vec<usize>,
    pub r_up: Vec<usize>,
    pub r_dn: Vec<usize>,
    pub alpha_plus: Vec<usize>,
    pub alpha_minus: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdnIndex {
    pub p: Vec<usize>,
    pub r_up: Vec<usize>,
    pub alpha_plus: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarIndex {
    pub horizon: usize,
    pub generators: Vec<GenIndex>,
    pub adns: Vec<AdnIndex>,
    pub num_vars: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "index")]
pub enum GroupKind {
    Generator(usize),
    Adn(usize),
    Line(usize),
}

/// Per-scenario aggregates `Ω⁺_{t,i} = max(0, Σ_w ξ)` and `Ω⁻_{t,i} = min(0, Σ_w ξ)`, indexed `[i][t]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorAggregates {
    pub plus: Vec<Vec<f64>>,
    pub minus: Vec<Vec<f64>>,
}

/// `rows[i]` holds `ξ_{w,t}` in farm-then-period order for `farms` farms.
pub fn aggregate_errors(rows: &[Vec<f64>], farms: usize, horizon: usize) -> ErrorAggregates {
    let mut plus = Vec::with_capacity(rows.len());
    let mut minus = Vec::with_capacity(rows.len());
    for row in rows {
        let total: Vec<f64> = (0..horizon).map(|t| (0..farms).map(|w| row[w * horizon + t]).sum()).collect();
        plus.push(total.iter().map(|&v| v.max(0.0)).collect());
        minus.push(total.iter().map(|&v| v.min(0.0)).collect());
    }
    ErrorAggregates { plus, minus }
}

/// Scenario vector of a generator group: `[Ω⁺(T), Ω⁻(T)]`.
pub fn generator_scenario(agg: &ErrorAggregates, i: usize) -> Vec<f64> {
    [agg.plus[i].as_slice(), agg.minus[i].as_slice()].concat()
}

/// Scenario vector of a line group: `[Ω⁺(T), Ω⁻(T), ξ(W·T)]`.
pub fn line_scenario(agg: &ErrorAggregates, wind_row: &[f64], i: usize) -> Vec<f64> {
    [agg.plus[i].as_slice(), agg.minus[i].as_slice(), wind_row].concat()
}

/// Scenario vector of an ADN group: `[Ω⁺(T), Pᴸ(T), Pᵁ(T), Eᴸ(T), Eᵁ(T)]`.
pub fn adn_scenario(agg: &ErrorAggregates, boundary: &crate::case::BoundarySample, i: usize) -> Vec<f64> {
    [agg.plus[i].as_slice(), &boundary.p_lower, &boundary.p_upper, &boundary.e_lower, &boundary.e_upper].concat()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BuildOptions {
    /// Replaces every group's radius.
    pub shared_rho: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BuiltDispatch {
    pub problem: CcpProblem,
    pub index: VarIndex,
    pub kinds: Vec<GroupKind>,
    /// `Σ_t Σ_g C_{g,0} ΔT`, not part of the LP objective.
    pub fixed_cost: f64,
    pub ptdf: Vec<Vec<f64>>,
    /// Held-out scenarios in group order, when the case carries them.
    pub test_samples: Option<Vec<Arc<SampleSet>>>,
}

impl BuiltDispatch {
    pub fn total_cost(&self, x: &[f64]) -> f64 {
        self.problem.objective_value(x) + self.fixed_cost
    }
}

pub fn build_ccp(case: &DispatchCase) -> Result<BuiltDispatch> {
    build_ccp_with(case, BuildOptions::default())
}

struct Columns {
    bounds: Vec<VarBound>,
    objective: Vec<f64>,
    names: Vec<String>,
}

impl Columns {
    fn add(&mut self, name: String, bound: VarBound, cost: f64) -> usize {
        self.bounds.push(bound);
        self.objective.push(cost);
        self.names.push(name);
        self.bounds.len() - 1
    }
}

fn zero_components(dim: usize) -> Vec<AffineExpr> {
    vec![AffineExpr::default(); dim]
}

/// Group label prefix plus the device name, or its index when unnamed.
pub fn device_label(kind: &str, name: &str, i: usize) -> String {
    if name.is_empty() {
        format!("{kind}{i}")
    } else {
        format!("{kind}:{name}")
    }
}

pub fn build_ccp_with(case: &DispatchCase, opts: BuildOptions) -> Result<BuiltDispatch> {
    case.validate()?;
    if let Some(rho) = opts.shared_rho {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(CcpError::model(format!("Wasserstein radius {rho} must be ≥ 0")));
        }
    }
    let nt = case.horizon;
    let dt = case.step;
    let ptdf = resolve_ptdf(&case.network)?;
    if ptdf.len() != case.network.lines.len() {
        return Err(CcpError::model("ptdf row count differs from line count"));
    }
    for (l, row) in ptdf.iter().enumerate() {
        if row.iter().any(|v| v.abs() > 1.0 + 1e-6) {
            log::warn!("ptdf row {l} has an entry with magnitude above 1");
        }
    }

    let mut cols = Columns { bounds: Vec::new(), objective: Vec::new(), names: Vec::new() };
    let mut generators = Vec::with_capacity(case.generators.len());
    for (g, gen) in case.generators.iter().enumerate() {
        let segments = gen
            .segments
            .iter()
            .enumerate()
            .map(|(s, &(width, cost))| {
                (0..nt).map(|t| cols.add(format!("p_seg[{g}][{s}][{t}]"), VarBound::between(0.0, width), cost * dt)).collect()
            })
            .collect();
        let mut per_t = |name: &str, bound: VarBound, cost: f64| -> Vec<usize> {
            (0..nt).map(|t| cols.add(format!("{name}[{g}][{t}]"), bound, cost)).collect()
        };
        let p = per_t("p", VarBound::between(gen.p_min, gen.p_max), 0.0);
        let r_up = per_t("r_up", VarBound::nonneg(), gen.reserve_cost_up);
        let r_dn = per_t("r_dn", VarBound::nonneg(), gen.reserve_cost_dn);
        let alpha_plus = per_t("alpha_plus", VarBound::nonneg(), 0.0);
        let alpha_minus = per_t("alpha_minus", VarBound::nonneg(), 0.0);
        generators.push(GenIndex { segments, p, r_up, r_dn, alpha_plus, alpha_minus });
    }
    let mut adns = Vec::with_capacity(case.adns.len());
    for (d, adn) in case.adns.iter().enumerate() {
        let mut per_t = |name: &str, bound: VarBound, cost: f64| -> Vec<usize> {
            (0..nt).map(|t| cols.add(format!("{name}[{d}][{t}]"), bound, cost)).collect()
        };
        let p = per_t("p_adn", VarBound::FREE, 0.0);
        let r_up = per_t("r_adn", VarBound::nonneg(), adn.reserve_cost_up);
        let alpha_plus = per_t("alpha_adn", VarBound::nonneg(), 0.0);
        adns.push(AdnIndex { p, r_up, alpha_plus });
    }
    let index = VarIndex { horizon: nt, generators, adns, num_vars: cols.bounds.len() };

    let mut rows: Vec<LinearConstraint> = Vec::new();
    for (gen, gi) in case.generators.iter().zip(&index.generators) {
        for t in 0..nt {
            // P = P^min + Σ_s P_s
            let mut anchor = vec![(gi.p[t], 1.0)];
            anchor.extend(gi.segments.iter().map(|s| (s[t], -1.0)));
            rows.push(LinearConstraint::new(anchor, Sense::Eq, gen.p_min));
            rows.push(LinearConstraint::new(vec![(gi.p[t], 1.0), (gi.r_up[t], 1.0)], Sense::Le, gen.p_max));
            // reversed form: P − R^dn ≤ P^min
            let down = match case.options.down_capacity {
                DownCapacity::Physical => Sense::Ge,
                DownCapacity::Reversed => Sense::Le,
            };
            rows.push(LinearConstraint::new(vec![(gi.p[t], 1.0), (gi.r_dn[t], -1.0)], down, gen.p_min));
            if t + 1 < nt {
                let ramp = vec![(gi.p[t + 1], 1.0), (gi.p[t], -1.0)];
                rows.push(LinearConstraint::new(ramp.clone(), Sense::Le, gen.ramp_up * dt));
                rows.push(LinearConstraint::new(ramp, Sense::Ge, gen.ramp_dn * dt));
            }
        }
    }
    for t in 0..nt {
        let mut balance: Vec<(usize, f64)> = index.generators.iter().map(|g| (g.p[t], 1.0)).collect();
        balance.extend(index.adns.iter().map(|d| (d.p[t], -1.0)));
        let load: f64 = case.network.buses.iter().map(|b| b.load[t]).sum();
        let wind: f64 = case.wind.farms.iter().map(|w| w.forecast[t]).sum();
        rows.push(LinearConstraint::new(balance, Sense::Eq, load - wind));

        let plus = index.generators.iter().map(|g| (g.alpha_plus[t], 1.0)).collect();
        rows.push(LinearConstraint::new(plus, Sense::Eq, 1.0));
        let mut minus: Vec<(usize, f64)> = index.generators.iter().map(|g| (g.alpha_minus[t], 1.0)).collect();
        minus.extend(index.adns.iter().map(|d| (d.alpha_plus[t], 1.0)));
        rows.push(LinearConstraint::new(minus, Sense::Eq, 1.0));
    }

    let wind_rows = case.wind_rows();
    let farms = case.wind.farms.len();
    let agg = aggregate_errors(&wind_rows, farms, nt);
    let test = case.has_test_set().then(|| {
        let rows = case.wind_test_rows();
        let agg = aggregate_errors(&rows, farms, nt);
        (rows, agg)
    });

    let rho_of = |own: f64| opts.shared_rho.unwrap_or(own);
    let mut groups = Vec::new();
    let mut kinds = Vec::new();
    let mut test_samples = Vec::new();

    let gen_samples = Arc::new(SampleSet::new((0..wind_rows.len()).map(|i| generator_scenario(&agg, i)).collect())?);
    let gen_test = match &test {
        Some((rows, agg)) => Some(Arc::new(SampleSet::new((0..rows.len()).map(|i| generator_scenario(agg, i)).collect())?)),
        None => None,
    };
    for (g, (gen, gi)) in case.generators.iter().zip(&index.generators).enumerate() {
        groups.push(
            JccGroup::new(device_label("gen", &gen.name, g), generator_constraints(gi, nt), gen_samples.clone(), gen.epsilon)
                .with_rho(rho_of(gen.rho)),
        );
        kinds.push(GroupKind::Generator(g));
        test_samples.extend(gen_test.clone());
    }

    for (d, (adn, di)) in case.adns.iter().zip(&index.adns).enumerate() {
        let samples = SampleSet::new(adn.boundary_samples.iter().enumerate().map(|(i, b)| adn_scenario(&agg, b, i)).collect())?;
        groups.push(
            JccGroup::new(device_label("adn", &adn.name, d), adn_constraints(di, nt, dt), Arc::new(samples), adn.epsilon)
                .with_rho(rho_of(adn.rho)),
        );
        kinds.push(GroupKind::Adn(d));
        if let Some((_, agg)) = &test {
            let rows = adn.test_boundary_samples.iter().enumerate().map(|(i, b)| adn_scenario(agg, b, i)).collect();
            test_samples.push(Arc::new(SampleSet::new(rows)?));
        }
    }

    if !case.network.lines.is_empty() {
        let line_samples = Arc::new(SampleSet::new(wind_rows.iter().enumerate().map(|(i, r)| line_scenario(&agg, r, i)).collect())?);
        let line_test = match &test {
            Some((rows, agg)) => Some(Arc::new(SampleSet::new(rows.iter().enumerate().map(|(i, r)| line_scenario(agg, r, i)).collect())?)),
            None => None,
        };
        for (l, line) in case.network.lines.iter().enumerate() {
            let constraints = line_constraints(case, &index, &ptdf[l], line.capacity);
            groups.push(JccGroup::new(format!("line{l}"), constraints, line_samples.clone(), line.epsilon).with_rho(rho_of(line.rho)));
            kinds.push(GroupKind::Line(l));
            test_samples.extend(line_test.clone());
        }
    }

    let fixed_cost = case.generators.iter().map(|g| g.fixed_cost * dt).sum::<f64>() * nt as f64;
    let problem = CcpProblem {
        objective: cols.objective,
        polytope: Polytope { constraints: rows, bounds: cols.bounds },
        groups,
        var_names: cols.names,
    };
    problem.validate()?;
    Ok(BuiltDispatch { problem, index, kinds, fixed_cost, ptdf, test_samples: test.map(|_| test_samples) })
}

/// `α⁻_t Ω⁺_t − R^dn_t ≤ 0` and `−α⁺_t Ω⁻_t − R^up_t ≤ 0` for every `t`.
fn generator_constraints(gi: &GenIndex, nt: usize) -> Vec<BiAffineConstraint> {
    let mut out = Vec::with_capacity(2 * nt);
    for t in 0..nt {
        let mut a = zero_components(2 * nt);
        a[t] = AffineExpr::new(vec![(gi.alpha_minus[t], 1.0)], 0.0);
        out.push(BiAffineConstraint::new(a, AffineExpr::new(vec![(gi.r_dn[t], -1.0)], 0.0)));
        let mut a = zero_components(2 * nt);
        a[nt + t] = AffineExpr::new(vec![(gi.alpha_plus[t], -1.0)], 0.0);
        out.push(BiAffineConstraint::new(a, AffineExpr::new(vec![(gi.r_up[t], -1.0)], 0.0)));
    }
    out
}

/// Five families per period over `[Ω⁺, Pᴸ, Pᵁ, Eᴸ, Eᵁ]`.
fn adn_constraints(di: &AdnIndex, nt: usize, dt: f64) -> Vec<BiAffineConstraint> {
    let mut out = Vec::with_capacity(5 * nt);
    let unit = |slot: usize, sign: f64| {
        let mut a = zero_components(5 * nt);
        a[slot] = AffineExpr::constant(sign);
        a
    };
    for t in 0..nt {
        let energy: Vec<(usize, f64)> = (0..=t).map(|tau| (di.p[tau], dt)).collect();
        let energy_res: Vec<(usize, f64)> = (0..=t).flat_map(|tau| [(di.p[tau], dt), (di.r_up[tau], dt)]).collect();
        // Pᴸ_t − P_t ≤ 0
        out.push(BiAffineConstraint::new(unit(nt + t, 1.0), AffineExpr::new(vec![(di.p[t], -1.0)], 0.0)));
        // Eᴸ_t − ΔT Σ_{τ≤t} P_τ ≤ 0
        let neg: Vec<(usize, f64)> = energy.iter().map(|&(j, c)| (j, -c)).collect();
        out.push(BiAffineConstraint::new(unit(3 * nt + t, 1.0), AffineExpr::new(neg, 0.0)));
        // P_t + R_t − Pᵁ_t ≤ 0
        out.push(BiAffineConstraint::new(unit(2 * nt + t, -1.0), AffineExpr::new(vec![(di.p[t], 1.0), (di.r_up[t], 1.0)], 0.0)));
        // ΔT Σ_{τ≤t} (P_τ + R_τ) − Eᵁ_t ≤ 0
        out.push(BiAffineConstraint::new(unit(4 * nt + t, -1.0), AffineExpr::new(energy_res, 0.0)));
        // α_t Ω⁺_t − R_t ≤ 0
        let mut a = zero_components(5 * nt);
        a[t] = AffineExpr::new(vec![(di.alpha_plus[t], 1.0)], 0.0);
        out.push(BiAffineConstraint::new(a, AffineExpr::new(vec![(di.r_up[t], -1.0)], 0.0)));
    }
    out
}

/// `±flow_t(x, ξ) − P^U ≤ 0` for every `t`, over `[Ω⁺, Ω⁻, ξ]`.
fn line_constraints(case: &DispatchCase, index: &VarIndex, psi: &[f64], capacity: f64) -> Vec<BiAffineConstraint> {
    let nt = case.horizon;
    let farms = case.wind.farms.len();
    let dim = 2 * nt + farms * nt;
    let mut out = Vec::with_capacity(2 * nt);
    for t in 0..nt {
        let mut omega_plus = Vec::new();
        let mut omega_minus = Vec::new();
        let mut base = Vec::new();
        for (gen, gi) in case.generators.iter().zip(&index.generators) {
            let k = psi[gen.bus];
            if k != 0.0 {
                omega_plus.push((gi.alpha_minus[t], -k));
                omega_minus.push((gi.alpha_plus[t], -k));
                base.push((gi.p[t], k));
            }
        }
        for (adn, di) in case.adns.iter().zip(&index.adns) {
            let k = psi[adn.bus];
            if k != 0.0 {
                omega_plus.push((di.alpha_plus[t], -k));
                base.push((di.p[t], -k));
            }
        }
        let wind: f64 = case.wind.farms.iter().map(|w| psi[w.bus] * w.forecast[t]).sum();
        let load: f64 = case.network.buses.iter().zip(psi).map(|(b, k)| k * b.load[t]).sum();
        let constant = wind - load;

        let mut a = zero_components(dim);
        a[t] = AffineExpr::new(omega_plus, 0.0);
        a[nt + t] = AffineExpr::new(omega_minus, 0.0);
        for (w, farm) in case.wind.farms.iter().enumerate() {
            a[2 * nt + w * nt + t] = AffineExpr::constant(psi[farm.bus]);
        }
        let negate = |e: &AffineExpr| AffineExpr::new(e.terms.iter().map(|&(j, c)| (j, -c)).collect(), -e.constant);
        let a_neg: Vec<AffineExpr> = a.iter().map(negate).collect();
        let b_pos = AffineExpr::new(base.clone(), constant - capacity);
        let b_neg = AffineExpr::new(base.iter().map(|&(j, c)| (j, -c)).collect(), -constant - capacity);
        out.push(BiAffineConstraint::new(a, b_pos));
        out.push(BiAffineConstraint::new(a_neg, b_neg));
    }
    out
}
