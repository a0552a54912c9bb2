//! Linear programming layer.
//!
//! Every LP generated by the chance-constrained solvers goes through an
//! [`LpBackend`]. The crate bundles a bounded-variable dense simplex
//! ([`DenseSimplex`]); other backends can be plugged in through
//! [`LpRouter::register_backend`].

mod simplex;

use std::fmt;
use std::sync::Arc;

use crate::error::{CcpError, Result};

pub use simplex::{DenseSimplex, PricingRule, SimplexOptions};

/// A sparse row: `(column, coefficient)` pairs.
pub type SparseRow = Vec<(usize, f64)>;

/// `min objectiveᵀ y` subject to `G y ≤ h`, `A_eq y = b_eq` and per-variable bounds.
///
/// Infinite bounds are represented by `f64::NEG_INFINITY` / `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub ineq_lhs: Vec<SparseRow>,
    pub ineq_rhs: Vec<f64>,
    pub eq_lhs: Vec<SparseRow>,
    pub eq_rhs: Vec<f64>,
    pub bounds: Vec<(f64, f64)>,
    pub var_names: Option<Vec<String>>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.ineq_lhs.len() + self.eq_lhs.len()
    }

    /// Appends a variable and returns its column index.
    pub fn add_variable(&mut self, lower: f64, upper: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lower, upper));
        let j = self.objective.len() - 1;
        if let Some(names) = &mut self.var_names {
            names.push(format!("aux{j}"));
        }
        j
    }

    pub fn add_le(&mut self, row: SparseRow, rhs: f64) {
        self.ineq_lhs.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: SparseRow, rhs: f64) {
        self.ineq_lhs.push(row.into_iter().map(|(j, a)| (j, -a)).collect());
        self.ineq_rhs.push(-rhs);
    }

    pub fn add_eq(&mut self, row: SparseRow, rhs: f64) {
        self.eq_lhs.push(row);
        self.eq_rhs.push(rhs);
    }

    /// Checks the structural invariants: consistent lengths, column indices in
    /// range, `lower ≤ upper` is *not* required here (an empty box is a valid,
    /// infeasible problem) but NaN bounds or coefficients are rejected.
    pub fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(CcpError::model(format!("LP has {} objective entries but {} bounds", n, self.bounds.len())));
        }
        if self.ineq_lhs.len() != self.ineq_rhs.len() {
            return Err(CcpError::model(format!(
                "LP has {} inequality rows but {} right-hand sides",
                self.ineq_lhs.len(),
                self.ineq_rhs.len()
            )));
        }
        if self.eq_lhs.len() != self.eq_rhs.len() {
            return Err(CcpError::model(format!("LP has {} equality rows but {} right-hand sides", self.eq_lhs.len(), self.eq_rhs.len())));
        }
        if let Some(names) = &self.var_names {
            if names.len() != n {
                return Err(CcpError::model("variable name count differs from variable count"));
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(CcpError::model("objective coefficients must be finite"));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(CcpError::model(format!("variable {j} has invalid bounds")));
            }
        }
        let rows = self.ineq_lhs.iter().zip(&self.ineq_rhs).chain(self.eq_lhs.iter().zip(&self.eq_rhs));
        for (r, (row, rhs)) in rows.enumerate() {
            if !rhs.is_finite() {
                return Err(CcpError::model(format!("row {r} has a non-finite right-hand side")));
            }
            for &(j, a) in row {
                if j >= n {
                    return Err(CcpError::model(format!("row {r} references column {j} but the LP has {n} variables")));
                }
                if !a.is_finite() {
                    return Err(CcpError::model(format!("row {r} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (row, rhs) in self.ineq_lhs.iter().zip(&self.ineq_rhs) {
            worst = worst.max(dot(row, x) - rhs);
        }
        for (row, rhs) in self.eq_lhs.iter().zip(&self.eq_rhs) {
            worst = worst.max((dot(row, x) - rhs).abs());
        }
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        worst
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Plain-text listing in the spirit of MPS, for debugging. Not MPS-conformant.
    pub fn to_listing(&self) -> String {
        self.to_string()
    }

    fn name(&self, j: usize) -> String {
        match &self.var_names {
            Some(names) => names[j].clone(),
            None => format!("y{j}"),
        }
    }
}

pub(crate) fn dot(row: &[(usize, f64)], x: &[f64]) -> f64 {
    row.iter().map(|&(j, a)| a * x[j]).sum()
}

impl fmt::Display for LpProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "NAME          LP")?;
        writeln!(f, "OBJSENSE      MIN")?;
        writeln!(f, "COLUMNS")?;
        for (j, c) in self.objective.iter().enumerate() {
            writeln!(f, "    {:<12} OBJ        {}", self.name(j), c)?;
        }
        writeln!(f, "ROWS")?;
        let render = |row: &SparseRow| row.iter().map(|&(j, a)| format!("{a:+} {}", self.name(j))).collect::<Vec<_>>().join(" ");
        for (i, (row, rhs)) in self.ineq_lhs.iter().zip(&self.ineq_rhs).enumerate() {
            writeln!(f, " L  R{i:<6} {} <= {rhs}", render(row))?;
        }
        for (i, (row, rhs)) in self.eq_lhs.iter().zip(&self.eq_rhs).enumerate() {
            writeln!(f, " E  E{i:<6} {} = {rhs}", render(row))?;
        }
        writeln!(f, "BOUNDS")?;
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            writeln!(f, "    {:<12} [{lo}, {hi}]", self.name(j))?;
        }
        writeln!(f, "ENDATA")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal point; empty unless `status == Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

impl LpSolution {
    pub fn infeasible(iterations: usize) -> Self {
        Self { status: LpStatus::Infeasible, x: Vec::new(), objective_value: f64::INFINITY, iterations }
    }

    pub fn unbounded(iterations: usize) -> Self {
        Self { status: LpStatus::Unbounded, x: Vec::new(), objective_value: f64::NEG_INFINITY, iterations }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Anything able to solve an [`LpProblem`].
///
/// Implementations must classify `Infeasible`/`Unbounded` correctly and return
/// primal-feasible points (within 1e-7) when reporting `Optimal`.
pub trait LpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, problem: &LpProblem) -> Result<LpSolution>;
}

/// Routes LP solves to a backend; the bundled simplex unless another one is registered.
#[derive(Clone)]
pub struct LpRouter {
    backend: Arc<dyn LpBackend>,
}

impl Default for LpRouter {
    fn default() -> Self {
        Self { backend: Arc::new(DenseSimplex::default()) }
    }
}

impl fmt::Debug for LpRouter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LpRouter").field("backend", &self.backend.name()).finish()
    }
}

impl LpRouter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_backend(backend: Arc<dyn LpBackend>) -> Self {
        Self { backend }
    }

    pub fn register_backend(&mut self, backend: Arc<dyn LpBackend>) {
        self.backend = backend;
    }

    pub fn backend_name(&self) -> &str {
        self.backend.name()
    }

    pub fn solve_lp(&self, problem: &LpProblem) -> Result<LpSolution> {
        problem.validate()?;
        self.backend.solve(problem)
    }
}

/// Solves `problem` with the bundled simplex.
pub fn solve_lp(problem: &LpProblem) -> Result<LpSolution> {
    problem.validate()?;
    DenseSimplex::default().solve(problem)
}
