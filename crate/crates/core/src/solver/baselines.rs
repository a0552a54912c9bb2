use serde::{Deserialize, Serialize};

use super::steps::{add_scenario_row, embed_margins};
use super::{CcpSolver, Method, SolveReport};
use crate::error::{CcpError, Result};
use crate::lp::{LpStatus, SparseRow};
use crate::model::{CcpProblem, LinearMargin};

/// Largest number of scenario-subset combinations the exhaustive solver enumerates.
pub const ORACLE_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialBounds {
    pub f_lower: f64,
    pub f_upper: f64,
    /// CVaR solution, when it produced the upper bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper_witness: Option<Vec<f64>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Advances `c` to the next `k`-subset of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for pos in (0..k).rev() {
        if c[pos] < n - k + pos {
            c[pos] += 1;
            for q in pos + 1..k {
                c[q] = c[q - 1] + 1;
            }
            return true;
        }
    }
    false
}

impl CcpSolver {
    /// Worst-case CVaR approximation: per group
    /// `t + (1/(εn)) Σ_i max(0, max_j ḡ_j(x, ξ_i) − t) ≤ 0`.
    /// A group with `ε = 0` gets hard constraints on every scenario.
    pub fn solve_cvar(&self, p: &CcpProblem) -> Result<SolveReport> {
        p.validate()?;
        let n = p.num_vars();
        let mut lp = p.deterministic_lp();
        let margins = embed_margins(p, &mut lp)?;
        for (l, g) in p.groups.iter().enumerate() {
            if g.epsilon == 0.0 {
                for xi in g.samples.rows() {
                    for (c, m) in g.constraints.iter().zip(&margins[l]) {
                        add_scenario_row(&mut lp, c, xi, m, &[]);
                    }
                }
                continue;
            }
            let t = lp.add_variable(f64::NEG_INFINITY, f64::INFINITY, 0.0);
            let weight = 1.0 / (g.epsilon * g.samples.n() as f64);
            let mut tail: SparseRow = vec![(t, 1.0)];
            for xi in g.samples.rows() {
                let w = lp.add_variable(0.0, f64::INFINITY, 0.0);
                tail.push((w, weight));
                for (c, m) in g.constraints.iter().zip(&margins[l]) {
                    add_scenario_row(&mut lp, c, xi, m, &[(t, -1.0), (w, -1.0)]);
                }
            }
            lp.add_le(tail, 0.0);
        }
        let sol = self.router.solve_lp(&lp)?;
        match sol.status {
            LpStatus::Infeasible => Ok(SolveReport::infeasible(Method::CVaR, p)),
            LpStatus::Unbounded => Err(CcpError::model("CVaR approximation is unbounded below")),
            LpStatus::Optimal => SolveReport::feasible(Method::CVaR, p, sol.x[..n].to_vec()),
        }
    }

    /// Exact sample-based optimum: every combination of `⌈(1 − ε_l) n_l⌉`-subsets
    /// across groups, each solved with hard robust constraints.
    pub fn solve_oracle(&self, p: &CcpProblem) -> Result<SolveReport> {
        p.validate()?;
        let sizes: Vec<(usize, usize)> = p.groups.iter().map(|g| (g.samples.n(), g.required_count())).collect();
        let required = sizes.iter().fold(1u128, |acc, &(n, k)| acc.saturating_mul(binomial(n, k)));
        if required > ORACLE_LIMIT {
            return Err(CcpError::Capacity { required, limit: ORACLE_LIMIT });
        }
        let n = p.num_vars();
        let mut base = p.deterministic_lp();
        let margins = embed_margins(p, &mut base)?;

        // one block of rows per (group, scenario)
        let blocks: Vec<Vec<crate::lp::LpProblem>> = p
            .groups
            .iter()
            .enumerate()
            .map(|(l, g)| {
                g.samples
                    .rows()
                    .iter()
                    .map(|xi| {
                        let mut rows = crate::lp::LpProblem::new();
                        rows.bounds = base.bounds.clone();
                        rows.objective = vec![0.0; base.num_vars()];
                        for (c, m) in g.constraints.iter().zip(&margins[l]) {
                            add_scenario_row(&mut rows, c, xi, m as &LinearMargin, &[]);
                        }
                        rows
                    })
                    .collect()
            })
            .collect();

        let mut combo: Vec<Vec<usize>> = sizes.iter().map(|&(_, k)| (0..k).collect()).collect();
        let mut best: Option<(f64, Vec<f64>)> = None;
        loop {
            let mut lp = base.clone();
            for (l, c) in combo.iter().enumerate() {
                for &i in c {
                    let b = &blocks[l][i];
                    lp.ineq_lhs.extend(b.ineq_lhs.iter().cloned());
                    lp.ineq_rhs.extend(b.ineq_rhs.iter().copied());
                }
            }
            let sol = self.router.solve_lp(&lp)?;
            match sol.status {
                LpStatus::Optimal => {
                    if best.as_ref().is_none_or(|(v, _)| sol.objective_value < *v) {
                        best = Some((sol.objective_value, sol.x[..n].to_vec()));
                    }
                }
                LpStatus::Infeasible => {}
                LpStatus::Unbounded => return Err(CcpError::model("objective is unbounded below on a scenario subset")),
            }
            // odometer over the groups' combinations
            let mut l = combo.len();
            loop {
                if l == 0 {
                    return match best {
                        None => Ok(SolveReport::infeasible(Method::Oracle, p)),
                        Some((_, x)) => SolveReport::feasible(Method::Oracle, p, x),
                    };
                }
                l -= 1;
                if next_combination(&mut combo[l], sizes[l].0) {
                    break;
                }
                combo[l] = (0..sizes[l].1).collect();
            }
        }
    }

    /// Every group's constraints imposed at its scenario mean, without robustification.
    pub fn solve_mean_scenario(&self, p: &CcpProblem) -> Result<SolveReport> {
        p.validate()?;
        let n = p.num_vars();
        let mut lp = p.deterministic_lp();
        let none = LinearMargin::default();
        for g in &p.groups {
            let mean = g.samples.mean();
            for c in &g.constraints {
                add_scenario_row(&mut lp, c, &mean, &none, &[]);
            }
        }
        let sol = self.router.solve_lp(&lp)?;
        match sol.status {
            LpStatus::Infeasible => Ok(SolveReport::infeasible(Method::MeanScenario, p)),
            LpStatus::Unbounded => Err(CcpError::model("mean-scenario problem is unbounded below")),
            LpStatus::Optimal => SolveReport::feasible(Method::MeanScenario, p, sol.x[..n].to_vec()),
        }
    }

    /// Lower bound from the mean-scenario problem; upper bound from CVaR when
    /// it is feasible, otherwise `2 f^L` (or `f^L + max(1, |f^L|)` when `f^L ≤ 0`).
    pub fn init_bounds(&self, p: &CcpProblem) -> Result<InitialBounds> {
        let mean = self.solve_mean_scenario(p)?;
        let Some(f_lower) = mean.objective else {
            return Err(CcpError::model("the mean-scenario problem is infeasible; supply objective bounds explicitly"));
        };
        let cvar = self.solve_cvar(p)?;
        let (f_upper, upper_witness) = match (cvar.objective, cvar.x_star) {
            (Some(v), Some(x)) => (v.max(f_lower), Some(x)),
            _ if f_lower > 0.0 => (2.0 * f_lower, None),
            _ => (f_lower + f_lower.abs().max(1.0), None),
        };
        Ok(InitialBounds { f_lower, f_upper, upper_witness })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_are_enumerated_in_order() {
        let mut c = vec![0, 1];
        let mut seen = vec![c.clone()];
        while next_combination(&mut c, 4) {
            seen.push(c.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(binomial(20, 4), 4845);
        assert_eq!(binomial(5, 5), 1);
        assert_eq!(binomial(6, 0), 1);
    }
}
