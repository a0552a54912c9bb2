//! Bisection on the objective level with relaxation-LP feasibility tests,
//! plus CVaR, mean-scenario and exhaustive baselines.

mod baselines;
mod steps;

use serde::{Deserialize, Serialize};

use crate::error::{CcpError, Result};
use crate::lp::{LpRouter, LpStatus};
use crate::model::{evaluate_group, CcpProblem, JccGroup, SampleSet, TOL_ZERO};

pub use baselines::{InitialBounds, ORACLE_LIMIT};
pub use steps::{gamma, z_step, InnerOutcome, SStep, StopReason};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    pub f_upper: f64,
    pub f_lower: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub gamma_tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    /// A point known to satisfy every group at `f_upper`, returned when no
    /// tested level is accepted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_witness: Option<Vec<f64>>,
}

impl BisectionConfig {
    pub fn new(f_lower: f64, f_upper: f64) -> Self {
        Self {
            f_upper,
            f_lower,
            delta1: 1e-4 * (f_upper + f_lower).abs().max(1.0),
            delta2: 1e-4,
            gamma_tol: 1e-8,
            max_outer: 100,
            max_inner: 50,
            upper_witness: None,
        }
    }

    pub fn from_bounds(bounds: &InitialBounds) -> Self {
        let mut cfg = Self::new(bounds.f_lower, bounds.f_upper);
        cfg.upper_witness = bounds.upper_witness.clone();
        cfg
    }

    pub fn with_delta1(mut self, delta1: f64) -> Self {
        self.delta1 = delta1;
        self
    }

    pub fn with_delta2(mut self, delta2: f64) -> Self {
        self.delta2 = delta2;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.f_upper.is_finite() || !self.f_lower.is_finite() {
            return Err(CcpError::model("objective bounds must be finite"));
        }
        if self.f_upper < self.f_lower {
            return Err(CcpError::model(format!("upper objective bound {} is below the lower bound {}", self.f_upper, self.f_lower)));
        }
        if !(self.delta1 > 0.0 && self.delta2 > 0.0 && self.gamma_tol > 0.0) {
            return Err(CcpError::model("delta1, delta2 and gamma_tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    AlsoXSingle,
    AlsoXMulti,
    IntuitiveExtension,
    CVaR,
    Oracle,
    /// Every uncertain quantity fixed at its sample mean.
    MeanScenario,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub label: String,
    pub epsilon: f64,
    /// Robustified in-sample violation rate of the reported point.
    pub violation_rate: f64,
    pub satisfied: bool,
}

/// One tested objective level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub level: f64,
    pub accepted: bool,
    /// Inner objective after every z-step (a single entry for z ≡ 1 methods).
    pub gammas: Vec<f64>,
    pub delta: Option<f64>,
    pub inner_iterations: usize,
    pub stop: StopReason,
    /// `cᵀx` of the iterate, if the level LP was feasible.
    pub objective: Option<f64>,
    pub violation_rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub status: SolveStatus,
    pub x_star: Option<Vec<f64>>,
    /// `cᵀx_star`.
    pub objective: Option<f64>,
    /// Last accepted objective level.
    pub level: Option<f64>,
    pub per_group: Vec<GroupOutcome>,
    pub trace: Vec<OuterRecord>,
    pub f_lower: Option<f64>,
    pub f_upper: Option<f64>,
}

impl SolveReport {
    fn infeasible(method: Method, p: &CcpProblem) -> Self {
        Self {
            method,
            status: SolveStatus::Infeasible,
            x_star: None,
            objective: None,
            level: None,
            per_group: p
                .groups
                .iter()
                .map(|g| GroupOutcome { label: g.label.clone(), epsilon: g.epsilon, violation_rate: 1.0, satisfied: false })
                .collect(),
            trace: Vec::new(),
            f_lower: None,
            f_upper: None,
        }
    }

    fn feasible(method: Method, p: &CcpProblem, x: Vec<f64>) -> Result<Self> {
        let per_group = group_outcomes(p, &x)?;
        Ok(Self {
            method,
            status: SolveStatus::Feasible,
            objective: Some(p.objective_value(&x)),
            x_star: Some(x),
            level: None,
            per_group,
            trace: Vec::new(),
            f_lower: None,
            f_upper: None,
        })
    }

    pub fn is_feasible(&self) -> bool {
        self.status == SolveStatus::Feasible
    }
}

fn group_outcomes(p: &CcpProblem, x: &[f64]) -> Result<Vec<GroupOutcome>> {
    p.groups
        .iter()
        .map(|g| {
            let r = evaluate_group(g, x, &g.samples, None)?;
            Ok(GroupOutcome {
                label: g.label.clone(),
                epsilon: g.epsilon,
                violation_rate: r.violation_rate,
                satisfied: r.satisfied >= g.required_count(),
            })
        })
        .collect()
}

/// Robustified in-sample violation rates and whether every group meets its risk level.
fn rates(p: &CcpProblem, x: &[f64]) -> Result<(Vec<f64>, bool)> {
    let mut v = Vec::with_capacity(p.groups.len());
    let mut ok = true;
    for g in &p.groups {
        let r = evaluate_group(g, x, &g.samples, None)?;
        ok &= r.satisfied >= g.required_count();
        v.push(r.violation_rate);
    }
    Ok((v, ok))
}

/// Entry point for every method; holds the LP backend used for all subproblems.
#[derive(Debug, Clone)]
pub struct CcpSolver {
    pub router: LpRouter,
    /// After bisection, re-solve `min cᵀx` with hard constraints on the
    /// scenarios the returned point satisfies.
    pub polish: bool,
}

impl Default for CcpSolver {
    fn default() -> Self {
        Self { router: LpRouter::default(), polish: true }
    }
}

struct LevelTest {
    accepted: bool,
    x: Option<Vec<f64>>,
    record: OuterRecord,
}

impl CcpSolver {
    pub fn new(router: LpRouter) -> Self {
        Self { router, polish: true }
    }

    pub fn without_polish(mut self) -> Self {
        self.polish = false;
        self
    }

    /// Alternating relaxation algorithm for several joint constraints.
    pub fn solve_also_x_multi(&self, p: &CcpProblem, cfg: &BisectionConfig) -> Result<SolveReport> {
        p.validate()?;
        cfg.validate()?;
        self.bisect(p, cfg, Method::AlsoXMulti, |f| {
            let inner = self.inner_alternation(p, f, cfg)?;
            let (objective, violation_rates, rates_ok) = match &inner.x {
                Some(x) => {
                    let (v, ok) = rates(p, x)?;
                    (Some(p.objective_value(x)), v, ok)
                }
                None => (None, Vec::new(), false),
            };
            let accepted = inner.stop == StopReason::GammaZero && rates_ok;
            Ok(LevelTest {
                accepted,
                record: OuterRecord {
                    level: f,
                    accepted,
                    inner_iterations: inner.gammas.len(),
                    gammas: inner.gammas,
                    delta: inner.delta,
                    stop: inner.stop,
                    objective,
                    violation_rates,
                },
                x: inner.x,
            })
        })
    }

    /// Single joint constraint, weights fixed at one.
    pub fn solve_also_x_single(&self, p: &CcpProblem, cfg: &BisectionConfig) -> Result<SolveReport> {
        if p.groups.len() != 1 {
            return Err(CcpError::model(format!(
                "the single-constraint method needs exactly one group, found {}; use solve_also_x_multi",
                p.groups.len()
            )));
        }
        p.validate()?;
        cfg.validate()?;
        self.bisect(p, cfg, Method::AlsoXSingle, |f| self.pooled_level(p, f))
    }

    /// Weights fixed at one across all groups; a level is accepted when every
    /// group meets its own risk level.
    pub fn solve_intuitive_extension(&self, p: &CcpProblem, cfg: &BisectionConfig) -> Result<SolveReport> {
        p.validate()?;
        cfg.validate()?;
        self.bisect(p, cfg, Method::IntuitiveExtension, |f| self.pooled_level(p, f))
    }

    fn pooled_level(&self, p: &CcpProblem, f: f64) -> Result<LevelTest> {
        match self.s_step(p, None, f)? {
            SStep::LevelInfeasible => Ok(LevelTest {
                accepted: false,
                x: None,
                record: OuterRecord {
                    level: f,
                    accepted: false,
                    gammas: Vec::new(),
                    delta: None,
                    inner_iterations: 0,
                    stop: StopReason::LevelInfeasible,
                    objective: None,
                    violation_rates: Vec::new(),
                },
            }),
            SStep::Solved { x, s } => {
                let ones: Vec<Vec<f64>> = s.iter().map(|sl| vec![1.0; sl.len()]).collect();
                let g = gamma(&s, &ones);
                let (violation_rates, accepted) = rates(p, &x)?;
                Ok(LevelTest {
                    accepted,
                    record: OuterRecord {
                        level: f,
                        accepted,
                        gammas: vec![g],
                        delta: None,
                        inner_iterations: 1,
                        stop: if g <= 0.0 { StopReason::GammaZero } else { StopReason::DeltaSmall },
                        objective: Some(p.objective_value(&x)),
                        violation_rates,
                    },
                    x: Some(x),
                })
            }
        }
    }

    fn bisect<F>(&self, p: &CcpProblem, cfg: &BisectionConfig, method: Method, mut test: F) -> Result<SolveReport>
    where
        F: FnMut(f64) -> Result<LevelTest>,
    {
        let (mut lo, mut hi) = (cfg.f_lower, cfg.f_upper);
        let mut best: Option<(Vec<f64>, f64)> = None;
        let mut trace = Vec::new();
        for _ in 0..cfg.max_outer {
            if hi - lo <= cfg.delta1 {
                break;
            }
            let f = 0.5 * (lo + hi);
            let t = test(f)?;
            log::debug!("level {f}: accepted={} gammas={:?}", t.accepted, t.record.gammas);
            trace.push(t.record);
            if t.accepted {
                hi = f;
                best = t.x.map(|x| (x, f));
            } else {
                lo = f;
            }
        }
        if best.is_none() {
            // the upper bound itself was never examined
            let t = test(cfg.f_upper)?;
            trace.push(t.record);
            if t.accepted {
                best = t.x.map(|x| (x, cfg.f_upper));
            }
        }
        if best.is_none() {
            if let Some(w) = &cfg.upper_witness {
                if rates(p, w)?.1 {
                    best = Some((w.clone(), cfg.f_upper));
                }
            }
        }

        let mut report = match best {
            None => SolveReport::infeasible(method, p),
            Some((x, level)) => {
                let x = if self.polish { self.polish_point(p, x)? } else { x };
                let mut r = SolveReport::feasible(method, p, x)?;
                r.level = Some(level);
                r
            }
        };
        report.trace = trace;
        report.f_lower = Some(lo);
        report.f_upper = Some(hi);
        Ok(report)
    }

    /// `min cᵀx` over `𝒳` with hard robust constraints on the scenarios `x` satisfies.
    /// Keeps `x` unless the re-solve is feasible for every group and no more expensive.
    fn polish_point(&self, p: &CcpProblem, x: Vec<f64>) -> Result<Vec<f64>> {
        let keep: Vec<Vec<bool>> = p
            .groups
            .iter()
            .map(|g| Ok(evaluate_group(g, &x, &g.samples, None)?.worst.iter().map(|&w| w <= TOL_ZERO).collect()))
            .collect::<Result<_>>()?;
        let sol = match self.hard_constrained(p, &keep)? {
            Some(sol) => sol,
            None => return Ok(x),
        };
        let before = p.objective_value(&x);
        let after = p.objective_value(&sol);
        if after <= before + 1e-9 * (1.0 + before.abs()) && rates(p, &sol)?.1 {
            Ok(sol)
        } else {
            Ok(x)
        }
    }

    /// `min cᵀx` over `𝒳` with `ḡ ≤ 0` on the selected scenarios of every group.
    pub(crate) fn hard_constrained(&self, p: &CcpProblem, keep: &[Vec<bool>]) -> Result<Option<Vec<f64>>> {
        let n = p.num_vars();
        let mut lp = p.deterministic_lp();
        let margins = steps::embed_margins(p, &mut lp)?;
        for (l, g) in p.groups.iter().enumerate() {
            for (i, xi) in g.samples.rows().iter().enumerate() {
                if !keep[l][i] {
                    continue;
                }
                for (c, m) in g.constraints.iter().zip(&margins[l]) {
                    steps::add_scenario_row(&mut lp, c, xi, m, &[]);
                }
            }
        }
        let sol = self.router.solve_lp(&lp)?;
        match sol.status {
            LpStatus::Optimal => Ok(Some(sol.x[..n].to_vec())),
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(CcpError::model("objective is unbounded below on the selected scenarios")),
        }
    }
}

/// Fraction of test scenarios under which every constraint of each group
/// holds at `x`, without robustification.
pub fn out_of_sample_reliability(x: &[f64], groups: &[JccGroup], test_scenarios: &[&SampleSet]) -> Result<Vec<f64>> {
    if groups.len() != test_scenarios.len() {
        return Err(CcpError::model(format!("{} groups but {} test scenario sets", groups.len(), test_scenarios.len())));
    }
    groups.iter().zip(test_scenarios).map(|(g, t)| Ok(evaluate_group(g, x, t, Some(0.0))?.satisfaction_rate)).collect()
}

pub fn solve_also_x_multi(p: &CcpProblem, cfg: &BisectionConfig) -> Result<SolveReport> {
    CcpSolver::default().solve_also_x_multi(p, cfg)
}

pub fn solve_also_x_single(p: &CcpProblem, cfg: &BisectionConfig) -> Result<SolveReport> {
    CcpSolver::default().solve_also_x_single(p, cfg)
}

pub fn solve_intuitive_extension(p: &CcpProblem, cfg: &BisectionConfig) -> Result<SolveReport> {
    CcpSolver::default().solve_intuitive_extension(p, cfg)
}

pub fn solve_cvar(p: &CcpProblem) -> Result<SolveReport> {
    CcpSolver::default().solve_cvar(p)
}

pub fn solve_oracle(p: &CcpProblem) -> Result<SolveReport> {
    CcpSolver::default().solve_oracle(p)
}

pub fn solve_mean_scenario(p: &CcpProblem) -> Result<SolveReport> {
    CcpSolver::default().solve_mean_scenario(p)
}

pub fn init_bounds(p: &CcpProblem) -> Result<InitialBounds> {
    CcpSolver::default().init_bounds(p)
}
