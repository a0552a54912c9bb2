//! Small reference problems.

use std::sync::Arc;

use crate::error::Result;
use crate::model::{AffineExpr, BiAffineConstraint, CcpProblem, JccGroup, LinearConstraint, Polytope, SampleSet, Sense, VarBound};

pub const INTERVAL_LOWER: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];
pub const INTERVAL_UPPER: [f64; 5] = [3.0, 4.0, 5.0, 6.0, 7.0];

/// `min x` subject to `ξᴸ ≤ x ≤ ξᵁ` jointly with probability `1 − ε`,
/// over five staggered intervals.
pub fn interval_problem(epsilon: f64) -> CcpProblem {
    let rows = INTERVAL_LOWER.iter().zip(&INTERVAL_UPPER).map(|(&l, &u)| vec![l, u]).collect();
    let samples = Arc::new(SampleSet::new(rows).expect("fixed data"));
    let lower = BiAffineConstraint::new(vec![AffineExpr::constant(1.0), AffineExpr::constant(0.0)], AffineExpr::new(vec![(0, -1.0)], 0.0));
    let upper = BiAffineConstraint::new(vec![AffineExpr::constant(0.0), AffineExpr::constant(-1.0)], AffineExpr::new(vec![(0, 1.0)], 0.0));
    CcpProblem {
        objective: vec![1.0],
        polytope: Polytope::free(1),
        groups: vec![JccGroup::new("interval", vec![lower, upper], samples, epsilon)],
        var_names: vec!["x".into()],
    }
}

/// `x_a ≥ ξ_a` and `x_b ≥ ξ_b` as one joint group over variables `a`, `b`.
fn covering_group(label: &str, a: usize, b: usize, samples: Vec<Vec<f64>>, epsilon: f64) -> Result<JccGroup> {
    let first = BiAffineConstraint::new(vec![AffineExpr::constant(1.0), AffineExpr::constant(0.0)], AffineExpr::new(vec![(a, -1.0)], 0.0));
    let second = BiAffineConstraint::new(vec![AffineExpr::constant(0.0), AffineExpr::constant(1.0)], AffineExpr::new(vec![(b, -1.0)], 0.0));
    Ok(JccGroup::new(label, vec![first, second], Arc::new(SampleSet::new(samples)?), epsilon))
}

/// Two joint groups `(x1 ≥ ξ1, x2 ≥ ξ2)` and `(x3 ≥ ξ3, x4 ≥ ξ4)` supplied by
/// `y1 + y2 = Σx` at cost `y1 + 2 y2` with `0 ≤ y1 ≤ 2`, `y2 ≥ 0`.
/// Each row of `xi` is one scenario `[ξ1, ξ2, ξ3, ξ4]`.
pub fn two_group_problem(xi: &[[f64; 4]], eps1: f64, eps2: f64) -> Result<CcpProblem> {
    let g1 = covering_group("jcc1", 0, 1, xi.iter().map(|r| vec![r[0], r[1]]).collect(), eps1)?;
    let g2 = covering_group("jcc2", 2, 3, xi.iter().map(|r| vec![r[2], r[3]]).collect(), eps2)?;
    let mut bounds = vec![VarBound::FREE; 4];
    bounds.push(VarBound::between(0.0, 2.0));
    bounds.push(VarBound::nonneg());
    Ok(CcpProblem {
        objective: vec![0.0, 0.0, 0.0, 0.0, 1.0, 2.0],
        polytope: Polytope {
            constraints: vec![LinearConstraint::new(vec![(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0), (4, -1.0), (5, -1.0)], Sense::Eq, 0.0)],
            bounds,
        },
        groups: vec![g1, g2],
        var_names: ["x1", "x2", "x3", "x4", "y1", "y2"].map(String::from).to_vec(),
    })
}

/// Small random instance drawn from `uniform`, a source of `[0, 1)` values:
/// 1–3 variables in `[0, 10]`, 1–2 groups of 1–3 mixed-sign constraints over
/// 2–6 scenarios of dimension 1–2, risk levels in `{0, 0.1, …, 0.6}`,
/// radius 0 or 0.05.
pub fn random_instance(uniform: &mut impl FnMut() -> f64) -> CcpProblem {
    let mut pick = |lo: usize, hi: usize| lo + ((uniform() * (hi - lo + 1) as f64) as usize).min(hi - lo);
    let d = pick(1, 3);
    let groups_n = pick(1, 2);
    let shape: Vec<(usize, usize, usize, usize)> = (0..groups_n).map(|_| (pick(1, 3), pick(2, 6), pick(1, 2), pick(0, 6))).collect();
    let mut range = |lo: f64, hi: f64| lo + (hi - lo) * uniform();
    let objective: Vec<f64> = (0..d).map(|_| range(-0.5, 2.0)).collect();
    let groups = shape
        .into_iter()
        .enumerate()
        .map(|(l, (m, n, k, eps_tenths))| {
            let constraints = (0..m)
                .map(|_| {
                    let a = (0..k).map(|_| AffineExpr::new((0..d).map(|j| (j, range(-0.3, 0.3))).collect(), range(-2.0, 2.0))).collect();
                    let b = AffineExpr::new((0..d).map(|j| (j, range(-1.0, 1.0))).collect(), range(-1.5, 0.5));
                    BiAffineConstraint::new(a, b)
                })
                .collect();
            let rows = (0..n).map(|_| (0..k).map(|_| range(0.0, 1.0)).collect()).collect();
            let samples = Arc::new(SampleSet::new(rows).expect("generated rows"));
            let rho = if range(0.0, 1.0) < 0.3 { 0.05 } else { 0.0 };
            JccGroup::new(format!("g{l}"), constraints, samples, eps_tenths as f64 / 10.0).with_rho(rho)
        })
        .collect();
    CcpProblem {
        objective,
        polytope: Polytope { constraints: Vec::new(), bounds: vec![VarBound::between(0.0, 10.0); d] },
        groups,
        var_names: Vec::new(),
    }
}
