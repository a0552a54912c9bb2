//! Solves, sweeps and plot-data extraction on top of [`build_ccp_with`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{audit_dispatch, AuditReport};
use crate::build::{build_ccp_with, BuildOptions, BuiltDispatch, GroupKind};
use crate::case::DispatchCase;
use ccopt_core::model::{evaluate_group, SampleSet};
use ccopt_core::solver::{out_of_sample_reliability, BisectionConfig, CcpSolver, Method, SolveReport, SolveStatus};
use ccopt_core::{CcpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchOutcome {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_rho: Option<f64>,
    pub report: SolveReport,
    /// LP objective plus fixed generator costs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport>,
    pub group_labels: Vec<String>,
    pub group_kinds: Vec<GroupKind>,
    /// Fraction of held-out scenarios satisfied per group.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<Vec<f64>>,
}

impl DispatchOutcome {
    pub fn is_feasible(&self) -> bool {
        self.report.is_feasible()
    }
}

/// Mean-scenario dispatch: every uncertain quantity at its sample mean, no robustification.
pub fn deterministic_dispatch(case: &DispatchCase) -> Result<SolveReport> {
    let built = build_ccp_with(case, BuildOptions::default())?;
    CcpSolver::default().solve_mean_scenario(&built.problem)
}

/// Bisection bounds from `init_bounds`, with the case's `f_lower` / `f_upper` options
/// taking over when the mean-scenario problem is infeasible or when set explicitly.
pub fn bisection_config(case: &DispatchCase, built: &BuiltDispatch, solver: &CcpSolver) -> Result<BisectionConfig> {
    let o = &case.options;
    let mut cfg = match (o.f_lower, o.f_upper) {
        (Some(lo), Some(hi)) => BisectionConfig::new(lo, hi),
        (lo, hi) => match solver.init_bounds(&built.problem) {
            Ok(b) => {
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
            Err(CcpError::Model(msg)) => return Err(CcpError::Model(format!("{msg} (case options f_lower and f_upper)"))),
            Err(e) => return Err(e),
        },
    };
    if let Some(d) = o.delta1 {
        cfg.delta1 = d;
    }
    if let Some(d) = o.delta2 {
        cfg.delta2 = d;
    }
    if let Some(g) = o.gamma_tol {
        cfg.gamma_tol = g;
    }
    Ok(cfg)
}

pub fn solve_built(case: &DispatchCase, built: &BuiltDispatch, method: Method, shared_rho: Option<f64>) -> Result<DispatchOutcome> {
    let solver = CcpSolver::default();
    let p = &built.problem;
    let report = match method {
        Method::AlsoXMulti => solver.solve_also_x_multi(p, &bisection_config(case, built, &solver)?)?,
        Method::AlsoXSingle => solver.solve_also_x_single(p, &bisection_config(case, built, &solver)?)?,
        Method::IntuitiveExtension => solver.solve_intuitive_extension(p, &bisection_config(case, built, &solver)?)?,
        Method::CVaR => solver.solve_cvar(p)?,
        Method::Oracle => solver.solve_oracle(p)?,
        Method::MeanScenario => solver.solve_mean_scenario(p)?,
    };
    let (total_cost, audit, reliability) = match &report.x_star {
        Some(x) => {
            let reliability = match &built.test_samples {
                Some(t) => {
                    let sets: Vec<&SampleSet> = t.iter().map(|s| s.as_ref()).collect();
                    Some(out_of_sample_reliability(x, &p.groups, &sets)?)
                }
                None => None,
            };
            (Some(built.total_cost(x)), Some(audit_dispatch(case, built, x)), reliability)
        }
        None => (None, None, None),
    };
    Ok(DispatchOutcome {
        method,
        shared_rho,
        report,
        total_cost,
        audit,
        group_labels: p.groups.iter().map(|g| g.label.clone()).collect(),
        group_kinds: built.kinds.clone(),
        reliability,
    })
}

/// Builds and solves `case` with `method`; `shared_rho` replaces every group's radius.
pub fn solve_dispatch(case: &DispatchCase, method: Method, shared_rho: Option<f64>) -> Result<DispatchOutcome> {
    let built = build_ccp_with(case, BuildOptions { shared_rho })?;
    solve_built(case, &built, method, shared_rho)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub method: Method,
    pub status: SolveStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_cost: Option<f64>,
    /// Robustified in-sample violation rate per group.
    pub in_sample_violation: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit_passed: Option<bool>,
}

impl SweepRow {
    fn from_outcome(rho: f64, o: &DispatchOutcome) -> Self {
        Self {
            rho,
            method: o.method,
            status: o.report.status,
            objective: o.report.objective,
            total_cost: o.total_cost,
            in_sample_violation: o.report.per_group.iter().map(|g| g.violation_rate).collect(),
            reliability: o.reliability.clone(),
            audit_passed: o.audit.as_ref().map(AuditReport::passed),
        }
    }

    /// Smallest held-out satisfaction rate over the groups selected by `pick`.
    pub fn min_reliability(&self, kinds: &[GroupKind], pick: impl Fn(&GroupKind) -> bool) -> Option<f64> {
        let r = self.reliability.as_ref()?;
        r.iter().zip(kinds).filter(|(_, k)| pick(k)).map(|(v, _)| *v).reduce(f64::min)
    }
}

/// Every `(ρ, method)` pair with all groups sharing `ρ`. Grid points run in
/// parallel; rows come back in grid order, then method order.
pub fn rho_sweep(case: &DispatchCase, grid: &[f64], methods: &[Method]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(CcpError::model("radius grid is empty"));
    }
    if let Some(r) = grid.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
        return Err(CcpError::model(format!("Wasserstein radius {r} must be ≥ 0")));
    }
    let per_point: Vec<Result<Vec<SweepRow>>> = grid
        .par_iter()
        .map(|&rho| {
            let built = build_ccp_with(case, BuildOptions { shared_rho: Some(rho) })?;
            methods.iter().map(|&m| Ok(SweepRow::from_outcome(rho, &solve_built(case, &built, m, Some(rho))?))).collect()
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

/// One period of an ADN's accumulated-energy trajectory against its boundary samples.
/// Every column has the per-period mean of the samples' energy-band midpoints subtracted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: usize,
    pub energy: f64,
    pub energy_plus_reserve: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub fn adn_trajectory(case: &DispatchCase, built: &BuiltDispatch, x: &[f64], d: usize) -> Result<Vec<TrajectoryRow>> {
    let adn = case.adns.get(d).ok_or_else(|| CcpError::model(format!("no ADN with index {d}")))?;
    let di = &built.index.adns[d];
    let dt = case.step;
    let n = adn.boundary_samples.len() as f64;
    let mut energy = 0.0;
    let mut with_reserve = 0.0;
    let mut out = Vec::with_capacity(case.horizon);
    for t in 0..case.horizon {
        energy += dt * x[di.p[t]];
        with_reserve += dt * (x[di.p[t]] + x[di.r_up[t]]);
        let centre = adn.boundary_samples.iter().map(|s| 0.5 * (s.e_lower[t] + s.e_upper[t])).sum::<f64>() / n;
        out.push(TrajectoryRow {
            t,
            energy: energy - centre,
            energy_plus_reserve: with_reserve - centre,
            lower: adn.boundary_samples.iter().map(|s| s.e_lower[t] - centre).collect(),
            upper: adn.boundary_samples.iter().map(|s| s.e_upper[t] - centre).collect(),
        });
    }
    Ok(out)
}

/// Robustified in-sample violation rate of every group at `x`.
pub fn in_sample_violation(built: &BuiltDispatch, x: &[f64]) -> Result<Vec<f64>> {
    built.problem.groups.iter().map(|g| Ok(evaluate_group(g, x, &g.samples, None)?.violation_rate)).collect()
}
