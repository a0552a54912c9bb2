//! Relaxation LP (s-step), closed-form weight update (z-step) and their alternation.

use serde::{Deserialize, Serialize};

use super::{BisectionConfig, CcpSolver};
use crate::error::{CcpError, Result};
use crate::lp::{LpProblem, LpStatus, SparseRow};
use crate::model::{evaluate_group, robustified_constraint, BiAffineConstraint, CcpProblem, LinearMargin};

/// Outcome of one relaxation LP at a fixed objective level.
#[derive(Debug, Clone, PartialEq)]
pub enum SStep {
    /// `x` and `s_{l,i} = max(0, max_j ḡ_{l,j}(x, ξ_{l,i}))` for every scenario.
    Solved { x: Vec<f64>, s: Vec<Vec<f64>> },
    /// `𝒳 ∩ {cᵀx ≤ f}` is empty.
    LevelInfeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    GammaZero,
    DeltaSmall,
    MaxInner,
    LevelInfeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    pub x: Option<Vec<f64>>,
    pub s: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub gamma: f64,
    pub gammas: Vec<f64>,
    pub delta: Option<f64>,
    pub stop: StopReason,
}

/// Appends `ρ‖a(x)‖_*` linearizations for every constraint of every group.
pub(crate) fn embed_margins(p: &CcpProblem, lp: &mut LpProblem) -> Result<Vec<Vec<LinearMargin>>> {
    p.groups.iter().map(|g| g.constraints.iter().map(|c| robustified_constraint(c, g.rho, g.norm)?.embed_margin(lp)).collect()).collect()
}

/// `ξᵀa(x) + b(x) + margin + Σ extra ≤ 0` as an LP row.
pub(crate) fn add_scenario_row(lp: &mut LpProblem, c: &BiAffineConstraint, xi: &[f64], margin: &LinearMargin, extra: &[(usize, f64)]) {
    let (mut row, constant) = c.scenario_row(xi);
    row.extend(margin.terms.iter().copied());
    row.extend(extra.iter().copied());
    lp.add_le(row, -(constant + margin.constant));
}

/// `s_{l,i} = max(0, max_j ḡ_{l,j})` at `x`.
pub(crate) fn relaxations(p: &CcpProblem, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    p.groups.iter().map(|g| Ok(evaluate_group(g, x, &g.samples, None)?.worst.into_iter().map(|w| w.max(0.0)).collect())).collect()
}

/// `max_j ḡ_{l,j}(x, ξ_{l,i})` without clipping at zero.
pub(crate) fn worst_values(p: &CcpProblem, x: &[f64]) -> Result<Vec<Vec<f64>>> {
    p.groups.iter().map(|g| Ok(evaluate_group(g, x, &g.samples, None)?.worst)).collect()
}

/// `(1/M) Σ_l (1/n_l) Σ_i z_{l,i} s_{l,i}`.
pub fn gamma(s: &[Vec<f64>], z: &[Vec<f64>]) -> f64 {
    if s.is_empty() {
        return 0.0;
    }
    let total: f64 = s.iter().zip(z).map(|(sl, zl)| sl.iter().zip(zl).map(|(a, b)| a * b).sum::<f64>() / sl.len() as f64).sum();
    total / s.len() as f64
}

/// Per group, minimizes `Σ z_i s_i` over `0 ≤ z ≤ 1`, `(1/n) Σ z_i ≥ 1 − ε`.
///
/// The `⌊εn⌋` largest relaxations get weight 0, the next one `1 − frac(εn)`,
/// everything else 1. Ties go to the lower scenario index. A group whose
/// relaxations are all zero keeps unit weights.
pub fn z_step(s: &[Vec<f64>], epsilons: &[f64]) -> Vec<Vec<f64>> {
    s.iter()
        .zip(epsilons)
        .map(|(sl, &eps)| {
            let n = sl.len();
            let target = eps * n as f64;
            let k = (target + 1e-9).floor() as usize;
            let frac = if target - k as f64 > 1e-9 { target - k as f64 } else { 0.0 };
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| sl[b].total_cmp(&sl[a]).then(a.cmp(&b)));
            let mut z = vec![1.0; n];
            if sl.iter().all(|&v| v <= 0.0) {
                return z;
            }
            for (pos, &i) in order.iter().enumerate() {
                if pos > k {
                    break;
                }
                if pos < k {
                    z[i] = 0.0;
                } else if frac > 0.0 {
                    z[i] = 1.0 - frac;
                }
            }
            z
        })
        .collect()
}

impl CcpSolver {
    /// Minimizes the weighted mean relaxation over `x ∈ 𝒳`, `cᵀx ≤ f`.
    /// `z = None` means every weight is 1. Scenarios with zero weight are
    /// left out of the LP; their relaxation is evaluated afterwards.
    pub fn s_step(&self, p: &CcpProblem, z: Option<&[Vec<f64>]>, f: f64) -> Result<SStep> {
        if !f.is_finite() {
            return Err(CcpError::model("objective level must be finite"));
        }
        let n = p.num_vars();
        let mut lp = p.deterministic_lp();
        lp.objective.iter_mut().for_each(|c| *c = 0.0);
        let level: SparseRow = p.objective.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(j, &c)| (j, c)).collect();
        lp.add_le(level, f);
        let margins = embed_margins(p, &mut lp)?;
        let m = p.groups.len() as f64;
        for (l, g) in p.groups.iter().enumerate() {
            let nl = g.samples.n() as f64;
            for (i, xi) in g.samples.rows().iter().enumerate() {
                let w = z.map_or(1.0, |z| z[l][i]);
                if w <= 0.0 {
                    continue;
                }
                let s = lp.add_variable(0.0, f64::INFINITY, w / (m * nl));
                for (c, margin) in g.constraints.iter().zip(&margins[l]) {
                    add_scenario_row(&mut lp, c, xi, margin, &[(s, -1.0)]);
                }
            }
        }
        let sol = self.router.solve_lp(&lp)?;
        match sol.status {
            LpStatus::Infeasible => Ok(SStep::LevelInfeasible),
            LpStatus::Unbounded => {
                Err(CcpError::model("relaxation LP is unbounded; the deterministic set is unbounded along a zero-cost direction"))
            }
            LpStatus::Optimal => {
                let x = sol.x[..n].to_vec();
                let s = relaxations(p, &x)?;
                Ok(SStep::Solved { x, s })
            }
        }
    }

    /// Alternates s-steps and z-steps at level `f` starting from `z = 1`.
    pub fn inner_alternation(&self, p: &CcpProblem, f: f64, cfg: &BisectionConfig) -> Result<InnerOutcome> {
        let eps: Vec<f64> = p.groups.iter().map(|g| g.epsilon).collect();
        let mut z: Vec<Vec<f64>> = p.groups.iter().map(|g| vec![1.0; g.samples.n()]).collect();
        let mut gammas = Vec::new();
        let mut out = InnerOutcome {
            x: None,
            s: Vec::new(),
            z: z.clone(),
            gamma: f64::INFINITY,
            gammas: Vec::new(),
            delta: None,
            stop: StopReason::MaxInner,
        };
        for it in 1..=cfg.max_inner.max(1) {
            let (x, s) = match self.s_step(p, Some(&z), f)? {
                SStep::Solved { x, s } => (x, s),
                SStep::LevelInfeasible => {
                    out.stop = StopReason::LevelInfeasible;
                    out.gammas = gammas;
                    return Ok(out);
                }
            };
            // rank on the unclipped worst value so zero relaxations are ordered by slack
            let worst = worst_values(p, &x)?;
            z = z_step(&worst, &eps);
            let g = gamma(&s, &z);
            let delta = gammas.last().map(|prev: &f64| (g - prev).abs());
            if let Some(prev) = gammas.last() {
                if g > prev + 1e-9 * (1.0 + prev.abs()) {
                    log::warn!("inner objective increased from {prev:e} to {g:e} at level {f}");
                }
            }
            gammas.push(g);
            out.x = Some(x);
            out.s = s;
            out.z = z.clone();
            out.gamma = g;
            out.delta = delta;
            if g <= cfg.gamma_tol {
                out.stop = StopReason::GammaZero;
                break;
            }
            if delta.is_some_and(|d| d < cfg.delta2) {
                out.stop = StopReason::DeltaSmall;
                break;
            }
            if it == cfg.max_inner {
                out.stop = StopReason::MaxInner;
            }
        }
        out.gammas = gammas;
        Ok(out)
    }
}
