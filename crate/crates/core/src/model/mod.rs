//! Chance-constrained problem representation.
//!
//! Decision variables are identified by position. Each joint constraint group
//! carries its own scenario set, risk level and Wasserstein radius.

mod robust;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{CcpError, Result};
use crate::lp::{LpProblem, SparseRow};

pub use robust::{dual_norm, robustified_constraint, LinearMargin, RobustConstraint};

/// Numeric zero for constraint satisfaction and relaxation magnitudes.
pub const TOL_ZERO: f64 = 1e-6;

/// Norm measuring the distance between scenarios inside the ambiguity set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Norm {
    #[default]
    L1,
    L2,
    Linf,
}

/// `Σ coef·x[idx] + constant`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AffineExpr {
    #[serde(default)]
    pub terms: Vec<(usize, f64)>,
    #[serde(default)]
    pub constant: f64,
}

impl AffineExpr {
    pub fn new(terms: Vec<(usize, f64)>, constant: f64) -> Self {
        Self { terms, constant }
    }

    pub fn constant(constant: f64) -> Self {
        Self { terms: Vec::new(), constant }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().fold(self.constant, |acc, &(j, c)| acc + c * x[j])
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, c)| c == 0.0)
    }

    fn max_index(&self) -> Option<usize> {
        self.terms.iter().map(|&(j, _)| j).max()
    }
}

/// `g(x, ξ) = ξᵀa(x) + b(x) ≤ 0` with affine `a` (one entry per component of ξ) and `b`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BiAffineConstraint {
    #[serde(default)]
    pub a: Vec<AffineExpr>,
    pub b: AffineExpr,
}

impl BiAffineConstraint {
    pub fn new(a: Vec<AffineExpr>, b: AffineExpr) -> Self {
        Self { a, b }
    }

    /// Builds `ξᵀ(A x + a0) + (cᵀx + d)` from dense data; zero entries are dropped.
    pub fn from_dense(a: &[Vec<f64>], a0: &[f64], c: &[f64], d: f64) -> Result<Self> {
        if a.len() != a0.len() {
            return Err(CcpError::model(format!("A has {} rows but a0 has {} entries", a.len(), a0.len())));
        }
        if let Some(row) = a.iter().find(|row| row.len() != c.len()) {
            return Err(CcpError::model(format!("A row has {} columns but c has {} entries", row.len(), c.len())));
        }
        let sparse =
            |row: &[f64]| -> Vec<(usize, f64)> { row.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j, v)).collect() };
        Ok(Self { a: a.iter().zip(a0).map(|(row, &k)| AffineExpr::new(sparse(row), k)).collect(), b: AffineExpr::new(sparse(c), d) })
    }

    /// Dimension of the scenario vector this constraint expects.
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn eval_a(&self, x: &[f64]) -> Vec<f64> {
        self.a.iter().map(|e| e.eval(x)).collect()
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        let a = self.eval_a(x);
        a.iter().zip(xi).map(|(p, q)| p * q).sum::<f64>() + self.b.eval(x)
    }

    /// Coefficients of `ξᵀa(x) + b(x)` as a sparse row in `x` plus a constant.
    pub fn scenario_row(&self, xi: &[f64]) -> (SparseRow, f64) {
        let mut terms: Vec<(usize, f64)> = Vec::new();
        let mut constant = self.b.constant;
        for (expr, &w) in self.a.iter().zip(xi) {
            if w == 0.0 {
                continue;
            }
            constant += w * expr.constant;
            terms.extend(expr.terms.iter().map(|&(j, c)| (j, c * w)));
        }
        terms.extend(self.b.terms.iter().copied());
        (merge_terms(terms), constant)
    }

    fn max_index(&self) -> Option<usize> {
        self.a.iter().filter_map(AffineExpr::max_index).chain(self.b.max_index()).max()
    }
}

/// Sorts by column and merges duplicates; exact zeros are dropped.
pub(crate) fn merge_terms(mut terms: Vec<(usize, f64)>) -> SparseRow {
    terms.sort_by_key(|&(j, _)| j);
    let mut out: SparseRow = Vec::with_capacity(terms.len());
    for (j, c) in terms {
        match out.last_mut() {
            Some(last) if last.0 == j => last.1 += c,
            _ => out.push((j, c)),
        }
    }
    out.retain(|&(_, c)| c != 0.0);
    out
}

/// Scenario realizations `ξ_1 … ξ_n`, all of one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SampleSet {
    rows: Vec<Vec<f64>>,
    dim: usize,
}

impl SampleSet {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(CcpError::model("a scenario set needs at least one scenario"));
        };
        let dim = first.len();
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(CcpError::model(format!("scenario {i} has dimension {} but scenario 0 has {dim}", row.len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(CcpError::model("scenario values must be finite"));
        }
        Ok(Self { rows, dim })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    /// Componentwise sample average.
    pub fn mean(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.dim).map(|r| self.rows.iter().map(|row| row[r]).sum::<f64>() / n).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for SampleSet {
    type Error = CcpError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SampleSet::new(rows)
    }
}

impl From<SampleSet> for Vec<Vec<f64>> {
    fn from(s: SampleSet) -> Self {
        s.rows
    }
}

fn is_default_norm(n: &Norm) -> bool {
    *n == Norm::L1
}

/// One joint chance constraint: every constraint must hold together with
/// probability at least `1 − epsilon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JccGroup {
    #[serde(default)]
    pub label: String,
    pub constraints: Vec<BiAffineConstraint>,
    pub samples: Arc<SampleSet>,
    pub epsilon: f64,
    #[serde(default)]
    pub rho: f64,
    #[serde(default, skip_serializing_if = "is_default_norm")]
    pub norm: Norm,
}

impl JccGroup {
    pub fn new(label: impl Into<String>, constraints: Vec<BiAffineConstraint>, samples: Arc<SampleSet>, epsilon: f64) -> Self {
        Self { label: label.into(), constraints, samples, epsilon, rho: 0.0, norm: Norm::L1 }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_norm(mut self, norm: Norm) -> Self {
        self.norm = norm;
        self
    }

    /// Number of scenarios that must be satisfied: `⌈(1 − ε) n⌉`.
    pub fn required_count(&self) -> usize {
        required_count(self.epsilon, self.samples.n())
    }
}

/// `⌈(1 − ε) n⌉`, guarded against round-off in `ε n`.
pub fn required_count(epsilon: f64, n: usize) -> usize {
    let allowed = (epsilon * n as f64 + 1e-9).floor().max(0.0) as usize;
    n - allowed.min(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn new(terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { terms, sense, rhs }
    }
}

/// Missing bounds are infinite.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VarBound {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
}

impl VarBound {
    pub const FREE: VarBound = VarBound { lower: None, upper: None };

    pub fn between(lower: f64, upper: f64) -> Self {
        Self { lower: Some(lower), upper: Some(upper) }
    }

    pub fn nonneg() -> Self {
        Self { lower: Some(0.0), upper: None }
    }

    fn as_pair(&self) -> (f64, f64) {
        (self.lower.unwrap_or(f64::NEG_INFINITY), self.upper.unwrap_or(f64::INFINITY))
    }
}

/// Deterministic feasible set: linear rows plus per-variable bounds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Polytope {
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
    pub bounds: Vec<VarBound>,
}

impl Polytope {
    pub fn free(n: usize) -> Self {
        Self { constraints: Vec::new(), bounds: vec![VarBound::FREE; n] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcpProblem {
    pub objective: Vec<f64>,
    pub polytope: Polytope,
    #[serde(default)]
    pub groups: Vec<JccGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub var_names: Vec<String>,
}

impl CcpProblem {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Structural check; all diagnostics joined into one model error.
    pub fn validate(&self) -> Result<()> {
        let diagnostics = validate_problem(self);
        if diagnostics.is_empty() {
            Ok(())
        } else {
            Err(CcpError::Model(diagnostics.join("; ")))
        }
    }

    /// `min cᵀx` over the deterministic polytope, with no chance constraints.
    pub fn deterministic_lp(&self) -> LpProblem {
        let mut lp = LpProblem::new();
        for (j, b) in self.polytope.bounds.iter().enumerate() {
            let (lo, hi) = b.as_pair();
            lp.add_variable(lo, hi, self.objective[j]);
        }
        for row in &self.polytope.constraints {
            let terms = merge_terms(row.terms.clone());
            match row.sense {
                Sense::Le => lp.add_le(terms, row.rhs),
                Sense::Ge => lp.add_ge(terms, row.rhs),
                Sense::Eq => lp.add_eq(terms, row.rhs),
            }
        }
        if !self.var_names.is_empty() {
            lp.var_names = Some(self.var_names.clone());
        }
        lp
    }
}

/// Per-group relaxation magnitudes `s` and activation weights `z`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RelaxationState {
    pub s: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

impl RelaxationState {
    /// `s = 0`, `z = 1` for every scenario of every group.
    pub fn initial(groups: &[JccGroup]) -> Self {
        Self { s: groups.iter().map(|g| vec![0.0; g.samples.n()]).collect(), z: groups.iter().map(|g| vec![1.0; g.samples.n()]).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub n: usize,
    pub satisfied: usize,
    pub satisfaction_rate: f64,
    pub violation_rate: f64,
    /// `max_j ḡ_j(x, ξ_i)` for every scenario.
    pub worst: Vec<f64>,
}

/// Joint satisfaction of `group` by `x` over `scenarios`, robustified with
/// `rho_override` or the group's own radius.
pub fn evaluate_group(group: &JccGroup, x: &[f64], scenarios: &SampleSet, rho_override: Option<f64>) -> Result<ViolationReport> {
    let rho = rho_override.unwrap_or(group.rho);
    if scenarios.n() == 0 {
        return Err(CcpError::model("empty scenario set"));
    }
    if let Some(c) = group.constraints.iter().find(|c| c.dim() != scenarios.dim()) {
        return Err(CcpError::model(format!(
            "group '{}': constraint expects scenarios of dimension {} but got {}",
            group.label,
            c.dim(),
            scenarios.dim()
        )));
    }
    if let Some(j) = group.constraints.iter().filter_map(BiAffineConstraint::max_index).max() {
        if j >= x.len() {
            return Err(CcpError::model(format!("group '{}' references variable {j} but x has {} entries", group.label, x.len())));
        }
    }

    // a(x) and the margin do not depend on the scenario
    let parts: Vec<(Vec<f64>, f64)> = group
        .constraints
        .iter()
        .map(|c| {
            let a = c.eval_a(x);
            let margin = if rho > 0.0 { rho * dual_norm(&a, group.norm) } else { 0.0 };
            (a, margin + c.b.eval(x))
        })
        .collect();

    let worst: Vec<f64> = scenarios
        .rows()
        .iter()
        .map(|xi| parts.iter().map(|(a, rest)| a.iter().zip(xi).map(|(p, q)| p * q).sum::<f64>() + rest).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let satisfied = worst.iter().filter(|&&w| w <= TOL_ZERO).count();
    let n = scenarios.n();
    Ok(ViolationReport {
        n,
        satisfied,
        satisfaction_rate: satisfied as f64 / n as f64,
        violation_rate: (n - satisfied) as f64 / n as f64,
        worst,
    })
}

/// Structural diagnostics; an empty list means the problem is well formed.
pub fn validate_problem(p: &CcpProblem) -> Vec<String> {
    let mut out = Vec::new();
    let n = p.num_vars();
    if p.objective.iter().any(|c| !c.is_finite()) {
        out.push("objective coefficients must be finite".to_string());
    }
    if p.polytope.bounds.len() != n {
        out.push(format!("polytope has {} variable bounds but the objective has {n} entries", p.polytope.bounds.len()));
    }
    for (j, b) in p.polytope.bounds.iter().enumerate() {
        if b.lower.is_some_and(|v| !v.is_finite()) || b.upper.is_some_and(|v| !v.is_finite()) {
            out.push(format!("bound of variable {j} must be finite or omitted"));
        }
    }
    for (r, row) in p.polytope.constraints.iter().enumerate() {
        if let Some(&(j, _)) = row.terms.iter().find(|&&(j, _)| j >= n) {
            out.push(format!("polytope row {r} references variable {j} of {n}"));
        }
        if !row.rhs.is_finite() || row.terms.iter().any(|t| !t.1.is_finite()) {
            out.push(format!("polytope row {r} has non-finite data"));
        }
    }
    if !p.var_names.is_empty() && p.var_names.len() != n {
        out.push(format!("{} variable names for {n} variables", p.var_names.len()));
    }
    for (l, g) in p.groups.iter().enumerate() {
        let name = if g.label.is_empty() { format!("group {l}") } else { format!("group '{}'", g.label) };
        if g.constraints.is_empty() {
            out.push(format!("{name}: m_l ≥ 1 required"));
        }
        if g.epsilon.is_nan() || g.epsilon < 0.0 {
            out.push(format!("{name}: risk level must be ≥ 0"));
        } else if g.epsilon >= 1.0 {
            out.push(format!("{name}: risk level must be < 1"));
        }
        if !g.rho.is_finite() || g.rho < 0.0 {
            out.push(format!("{name}: Wasserstein radius must be ≥ 0"));
        }
        let k = g.samples.dim();
        for (j, c) in g.constraints.iter().enumerate() {
            if c.dim() != k {
                out.push(format!("{name}: constraint {j} has {} uncertain components but scenarios have {k}", c.dim()));
            }
            if let Some(v) = c.max_index().filter(|&v| v >= n) {
                out.push(format!("{name}: constraint {j} references variable {v} of {n}"));
            }
            let finite = c.a.iter().chain(std::iter::once(&c.b)).all(|e| e.constant.is_finite() && e.terms.iter().all(|t| t.1.is_finite()));
            if !finite {
                out.push(format!("{name}: constraint {j} has non-finite data"));
            }
        }
    }
    out
}
