//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row `i` gets a logical column `w_i` with coefficient `+1`:
//! inequality rows give `w_i ∈ [0, ∞)`, equality rows `w_i ∈ [0, 0]`.
//! Rows whose logical cannot absorb the initial residual receive an
//! artificial variable; phase 1 minimizes the sum of artificials, phase 2 the
//! true objective. Artificials never re-enter once they leave the basis, so
//! they need no tableau storage.
//!
//! The logical columns of the tableau hold `B⁻¹`, which is used at the end for
//! a couple of rounds of iterative refinement of the basic values.

use log::trace;

use super::{dot, LpBackend, LpProblem, LpSolution, LpStatus};
use crate::error::{CcpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PricingRule {
    /// Smallest eligible index for both entering and leaving choices.
    Bland,
    /// Largest reduced cost, switching to Bland's rule after a run of
    /// degenerate pivots and back after the first non-degenerate one.
    DantzigWithBlandFallback,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    pub pricing: PricingRule,
    /// Internal primal feasibility tolerance.
    pub feasibility_tol: f64,
    /// Tolerance on reduced costs for optimality.
    pub optimality_tol: f64,
    /// Entries of the entering column below this are never pivoted on.
    pub pivot_tol: f64,
    /// Iteration budget is `iteration_factor · (rows + cols)`.
    pub iteration_factor: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_run: usize,
    /// Reported points must satisfy every row within this absolute tolerance.
    pub reported_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            pricing: PricingRule::DantzigWithBlandFallback,
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_tol: 1e-10,
            iteration_factor: 50,
            degenerate_run: 30,
            reported_tol: 1e-7,
        }
    }
}

/// The bundled LP backend.
#[derive(Debug, Clone, Default)]
pub struct DenseSimplex {
    pub options: SimplexOptions,
}

impl DenseSimplex {
    pub fn new(options: SimplexOptions) -> Self {
        Self { options }
    }
}

impl LpBackend for DenseSimplex {
    fn name(&self) -> &str {
        "dense-simplex"
    }

    fn solve(&self, problem: &LpProblem) -> Result<LpSolution> {
        if problem.bounds.iter().any(|&(lo, hi)| lo > hi) {
            return Ok(LpSolution::infeasible(0));
        }
        let mut tab = Tableau::new(problem, self.options);
        tab.run()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Free nonbasic column resting at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasicVar {
    Col(usize),
    Artificial,
}

enum Step {
    Unbounded,
    Flip(f64),
    Pivot { row: usize, theta: f64, to_upper: bool },
}

struct Tableau<'a> {
    problem: &'a LpProblem,
    opts: SimplexOptions,
    /// Structural column count.
    n: usize,
    m: usize,
    /// `n + m`: structurals then logicals.
    ncols: usize,
    /// Row-major `m × ncols` tableau `B⁻¹ [A | I]`.
    t: Vec<f64>,
    rhs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    state: Vec<ColState>,
    /// Value of every column while nonbasic; stale while basic.
    value: Vec<f64>,
    basis: Vec<BasicVar>,
    xb: Vec<f64>,
    /// Upper bound of an artificial while basic: `∞` in phase 1, `0` after.
    art_hi: f64,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    bland: bool,
    degenerate_streak: usize,
    scratch: Vec<usize>,
}

impl<'a> Tableau<'a> {
    fn new(problem: &'a LpProblem, opts: SimplexOptions) -> Self {
        let n = problem.num_vars();
        let m = problem.num_rows();
        let ncols = n + m;
        let mut t = vec![0.0; m * ncols];
        let mut rhs = Vec::with_capacity(m);
        let rows = problem.ineq_lhs.iter().zip(&problem.ineq_rhs).chain(problem.eq_lhs.iter().zip(&problem.eq_rhs));
        for (i, (row, &b)) in rows.enumerate() {
            for &(j, a) in row {
                t[i * ncols + j] += a;
            }
            t[i * ncols + n + i] = 1.0;
            rhs.push(b);
        }

        let mut lo = Vec::with_capacity(ncols);
        let mut hi = Vec::with_capacity(ncols);
        for &(l, h) in &problem.bounds {
            lo.push(l);
            hi.push(h);
        }
        for i in 0..m {
            lo.push(0.0);
            hi.push(if i < problem.ineq_lhs.len() { f64::INFINITY } else { 0.0 });
        }

        let mut state = vec![ColState::AtLower; ncols];
        let mut value = vec![0.0; ncols];
        for j in 0..n {
            if lo[j].is_finite() {
                state[j] = ColState::AtLower;
                value[j] = lo[j];
            } else if hi[j].is_finite() {
                state[j] = ColState::AtUpper;
                value[j] = hi[j];
            } else {
                state[j] = ColState::Free;
                value[j] = 0.0;
            }
        }

        let max_iterations = opts.iteration_factor.max(1) * (m + n).max(1);
        Self {
            problem,
            opts,
            n,
            m,
            ncols,
            t,
            rhs,
            lo,
            hi,
            state,
            value,
            basis: vec![BasicVar::Artificial; m],
            xb: vec![0.0; m],
            art_hi: f64::INFINITY,
            cost: vec![0.0; ncols],
            d: vec![0.0; ncols],
            iterations: 0,
            max_iterations,
            bland: opts.pricing == PricingRule::Bland,
            degenerate_streak: 0,
            scratch: Vec::new(),
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.ncols + j]
    }

    fn run(&mut self) -> Result<LpSolution> {
        // initial basis: logicals where they absorb the residual, artificials elsewhere
        let mut any_artificial = false;
        for i in 0..self.m {
            let mut r = self.rhs[i];
            for j in 0..self.n {
                let a = self.at(i, j);
                if a != 0.0 {
                    r -= a * self.value[j];
                }
            }
            let w = self.n + i;
            if r >= self.lo[w] - self.opts.feasibility_tol && r <= self.hi[w] + self.opts.feasibility_tol {
                self.basis[i] = BasicVar::Col(w);
                self.state[w] = ColState::Basic(i);
                self.xb[i] = r.clamp(self.lo[w], self.hi[w]);
            } else {
                any_artificial = true;
                self.basis[i] = BasicVar::Artificial;
                self.state[w] = ColState::AtLower;
                self.value[w] = 0.0;
                if r < 0.0 {
                    let row = &mut self.t[i * self.ncols..(i + 1) * self.ncols];
                    row.iter_mut().for_each(|v| *v = -*v);
                }
                self.xb[i] = r.abs();
            }
        }

        if any_artificial {
            self.cost.iter_mut().for_each(|c| *c = 0.0);
            self.compute_reduced_costs(1.0);
            match self.iterate()? {
                PhaseEnd::Optimal => {}
                PhaseEnd::Unbounded => {
                    return Err(self.numeric("phase 1 reported an unbounded ray"));
                }
            }
            let infeasibility: f64 = (0..self.m).filter(|&i| self.basis[i] == BasicVar::Artificial).map(|i| self.xb[i]).sum();
            let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
            if infeasibility > 1e-8 * scale {
                trace!("phase 1 infeasibility {infeasibility:e}");
                return Ok(LpSolution::infeasible(self.iterations));
            }
            self.drive_out_artificials();
        }
        self.art_hi = 0.0;

        for j in 0..self.ncols {
            self.cost[j] = if j < self.n { self.problem.objective[j] } else { 0.0 };
        }
        self.compute_reduced_costs(0.0);
        match self.iterate()? {
            PhaseEnd::Optimal => {}
            PhaseEnd::Unbounded => return Ok(LpSolution::unbounded(self.iterations)),
        }

        let x = self.extract_solution();
        let violation = self.problem.max_violation(&x);
        let scale = 1.0 + self.rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        if violation > self.opts.reported_tol * scale {
            return Err(self.numeric(&format!("solution violates the constraints by {violation:e} after refinement")));
        }
        let objective_value = self.problem.objective_value(&x);
        Ok(LpSolution { status: LpStatus::Optimal, x, objective_value, iterations: self.iterations })
    }

    fn numeric(&self, message: &str) -> CcpError {
        CcpError::Numeric { message: message.to_string(), iterations: self.iterations, rows: self.m, cols: self.n }
    }

    /// `d_j = c_j − Σ_i c_B(i) T_ij`; `art_cost` is the cost of a basic artificial.
    fn compute_reduced_costs(&mut self, art_cost: f64) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = match self.basis[i] {
                BasicVar::Col(j) => self.cost[j],
                BasicVar::Artificial => art_cost,
            };
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
            for (dj, &a) in self.d.iter_mut().zip(row) {
                *dj -= cb * a;
            }
        }
        for i in 0..self.m {
            if let BasicVar::Col(j) = self.basis[i] {
                self.d[j] = 0.0;
            }
        }
    }

    fn iterate(&mut self) -> Result<PhaseEnd> {
        loop {
            let Some((j, dir)) = self.price() else {
                return Ok(PhaseEnd::Optimal);
            };
            if self.iterations >= self.max_iterations {
                return Err(self.numeric("iteration limit exceeded"));
            }
            self.iterations += 1;
            let step = self.ratio_test(j, dir);
            let theta = match step {
                Step::Unbounded => return Ok(PhaseEnd::Unbounded),
                Step::Flip(theta) => {
                    self.apply_move(j, dir, theta);
                    self.state[j] = match self.state[j] {
                        ColState::AtLower => ColState::AtUpper,
                        _ => ColState::AtLower,
                    };
                    self.value[j] = if self.state[j] == ColState::AtUpper { self.hi[j] } else { self.lo[j] };
                    theta
                }
                Step::Pivot { row, theta, to_upper } => {
                    self.apply_move(j, dir, theta);
                    let entering_value = self.value[j];
                    match self.basis[row] {
                        BasicVar::Col(k) => {
                            if to_upper {
                                self.state[k] = ColState::AtUpper;
                                self.value[k] = self.hi[k];
                            } else if self.lo[k].is_finite() {
                                self.state[k] = ColState::AtLower;
                                self.value[k] = self.lo[k];
                            } else {
                                self.state[k] = ColState::Free;
                                self.value[k] = 0.0;
                            }
                        }
                        BasicVar::Artificial => {}
                    }
                    self.pivot(row, j);
                    self.basis[row] = BasicVar::Col(j);
                    self.state[j] = ColState::Basic(row);
                    self.xb[row] = entering_value;
                    theta
                }
            };
            if theta <= 1e-12 {
                self.degenerate_streak += 1;
                if self.opts.pricing == PricingRule::DantzigWithBlandFallback && self.degenerate_streak >= self.opts.degenerate_run {
                    self.bland = true;
                }
            } else {
                self.degenerate_streak = 0;
                if self.opts.pricing == PricingRule::DantzigWithBlandFallback {
                    self.bland = false;
                }
            }
        }
    }

    /// Returns the entering column and its direction (`+1` increase, `-1` decrease).
    fn price(&self) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncols {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let dj = self.d[j];
            let dir = match self.state[j] {
                ColState::Basic(_) => continue,
                ColState::AtLower if dj < -tol => 1.0,
                ColState::AtUpper if dj > tol => -1.0,
                ColState::Free if dj.abs() > tol => -dj.signum(),
                _ => continue,
            };
            if self.bland {
                return Some((j, dir));
            }
            if dj.abs() > best_score {
                best_score = dj.abs();
                best = Some((j, dir));
            }
        }
        best
    }

    fn basic_bounds(&self, i: usize) -> (f64, f64) {
        match self.basis[i] {
            BasicVar::Col(k) => (self.lo[k], self.hi[k]),
            BasicVar::Artificial => (0.0, self.art_hi),
        }
    }

    fn basic_index(&self, i: usize) -> usize {
        match self.basis[i] {
            BasicVar::Col(k) => k,
            BasicVar::Artificial => self.ncols + i,
        }
    }

    fn ratio_test(&self, j: usize, dir: f64) -> Step {
        let ptol = self.opts.pivot_tol;
        let ftol = self.opts.feasibility_tol;
        let range = self.hi[j] - self.lo[j];

        // pass 1: step length with bounds relaxed by the feasibility tolerance
        let mut relaxed = f64::INFINITY;
        let mut exact_min = f64::INFINITY;
        for i in 0..self.m {
            let alpha = dir * self.at(i, j);
            if alpha.abs() <= ptol {
                continue;
            }
            let (lo, hi) = self.basic_bounds(i);
            let (exact, loose) = if alpha > 0.0 {
                if !lo.is_finite() {
                    continue;
                }
                ((self.xb[i] - lo) / alpha, (self.xb[i] - lo + ftol) / alpha)
            } else {
                if !hi.is_finite() {
                    continue;
                }
                ((hi - self.xb[i]) / -alpha, (hi - self.xb[i] + ftol) / -alpha)
            };
            relaxed = relaxed.min(loose);
            exact_min = exact_min.min(exact.max(0.0));
        }

        if relaxed == f64::INFINITY {
            return if range.is_finite() { Step::Flip(range) } else { Step::Unbounded };
        }

        let limit = if self.bland { exact_min + 1e-12 } else { relaxed };
        if range.is_finite() && range <= limit {
            return Step::Flip(range);
        }

        // pass 2: among rows that block within the limit pick the best pivot
        let mut chosen: Option<(usize, f64, bool)> = None;
        let mut best_key = f64::NEG_INFINITY;
        for i in 0..self.m {
            let alpha = dir * self.at(i, j);
            if alpha.abs() <= ptol {
                continue;
            }
            let (lo, hi) = self.basic_bounds(i);
            let (exact, to_upper) = if alpha > 0.0 {
                if !lo.is_finite() {
                    continue;
                }
                ((self.xb[i] - lo) / alpha, false)
            } else {
                if !hi.is_finite() {
                    continue;
                }
                ((hi - self.xb[i]) / -alpha, true)
            };
            let exact = exact.max(0.0);
            if exact > limit {
                continue;
            }
            // Bland: smallest basic index; otherwise largest |alpha|
            let key = if self.bland { -(self.basic_index(i) as f64) } else { alpha.abs() };
            if key > best_key {
                best_key = key;
                chosen = Some((i, exact, to_upper));
            }
        }
        match chosen {
            Some((row, theta, to_upper)) => Step::Pivot { row, theta, to_upper },
            None => Step::Unbounded,
        }
    }

    /// Moves column `j` by `dir·theta` and updates basic values.
    fn apply_move(&mut self, j: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        for i in 0..self.m {
            let a = self.t[i * self.ncols + j];
            if a != 0.0 {
                self.xb[i] -= theta * dir * a;
            }
        }
        self.value[j] += dir * theta;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + j];
        let inv = 1.0 / p;
        self.scratch.clear();
        for k in 0..nc {
            let v = &mut self.t[r * nc + k];
            if *v != 0.0 {
                *v *= inv;
                self.scratch.push(k);
            }
        }
        self.t[r * nc + j] = 1.0;

        let (before, rest) = self.t.split_at_mut(r * nc);
        let (pivot_row, after) = rest.split_at_mut(nc);
        let nz = &self.scratch;
        let eliminate = |row: &mut [f64]| {
            let f = row[j];
            if f == 0.0 {
                return;
            }
            for &k in nz {
                let v = row[k] - f * pivot_row[k];
                row[k] = if v.abs() < 1e-14 { 0.0 } else { v };
            }
            row[j] = 0.0;
        };
        before.chunks_exact_mut(nc).for_each(eliminate);
        after.chunks_exact_mut(nc).for_each(eliminate);

        let f = self.d[j];
        if f != 0.0 {
            for &k in nz {
                self.d[k] -= f * pivot_row[k];
            }
            self.d[j] = 0.0;
        }
    }

    fn drive_out_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] != BasicVar::Artificial {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = 1e-7;
            for k in 0..self.ncols {
                if matches!(self.state[k], ColState::Basic(_)) {
                    continue;
                }
                let a = self.at(r, k).abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(k);
                }
            }
            if let Some(k) = best {
                let value = self.value[k];
                self.pivot(r, k);
                self.basis[r] = BasicVar::Col(k);
                self.state[k] = ColState::Basic(r);
                self.xb[r] = value;
            } else {
                // redundant row: the artificial stays basic, pinned at zero
                self.xb[r] = 0.0;
            }
        }
    }

    fn column_value(&self, j: usize) -> f64 {
        match self.state[j] {
            ColState::Basic(i) => self.xb[i],
            _ => self.value[j],
        }
    }

    fn extract_solution(&mut self) -> Vec<f64> {
        let problem = self.problem;
        let ineq = problem.ineq_lhs.len();
        for _ in 0..2 {
            let mut values: Vec<f64> = (0..self.ncols).map(|j| self.column_value(j)).collect();
            for i in 0..self.m {
                if self.basis[i] == BasicVar::Artificial {
                    values.push(self.xb[i]);
                }
            }
            let x = &values[..self.n];
            let residual: Vec<f64> = (0..self.m)
                .map(|i| {
                    let row = if i < ineq { &problem.ineq_lhs[i] } else { &problem.eq_lhs[i - ineq] };
                    self.rhs[i] - dot(row, x) - values[self.n + i]
                })
                .collect();
            let worst = residual.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
            if worst < 1e-13 {
                break;
            }
            // artificial rows carry a ±1 artificial column; fold it into the logical's B⁻¹ column
            for k in 0..self.m {
                let row = &self.t[k * self.ncols + self.n..(k + 1) * self.ncols];
                let delta: f64 = row.iter().zip(&residual).map(|(a, r)| a * r).sum();
                self.xb[k] += delta;
            }
        }

        (0..self.n)
            .map(|j| {
                let v = self.column_value(j);
                let (lo, hi) = (self.lo[j], self.hi[j]);
                if v < lo && lo - v < 1e-7 {
                    lo
                } else if v > hi && v - hi < 1e-7 {
                    hi
                } else {
                    v
                }
            })
            .collect()
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}
