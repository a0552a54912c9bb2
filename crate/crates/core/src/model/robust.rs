//! Worst case of a bi-affine constraint over a norm ball around a scenario:
//! `ḡ(x, ξ) = ρ‖a(x)‖_* + ξᵀa(x) + b(x)`.

use super::{AffineExpr, BiAffineConstraint, Norm};
use crate::error::{CcpError, Result};
use crate::lp::{LpProblem, SparseRow};

/// Dual of the uncertainty norm: ℓ1 ↔ ℓ∞, ℓ2 ↔ ℓ2.
pub fn dual_norm(v: &[f64], norm: Norm) -> f64 {
    match norm {
        Norm::L1 => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        Norm::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        Norm::Linf => v.iter().map(|x| x.abs()).sum(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RobustConstraint<'a> {
    pub base: &'a BiAffineConstraint,
    pub rho: f64,
    pub norm: Norm,
}

/// Margin term added to `ξᵀa(x) + b(x)` inside an LP: `Σ terms·y + constant`,
/// where `y` are auxiliary columns appended by [`RobustConstraint::embed_margin`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearMargin {
    pub terms: SparseRow,
    pub constant: f64,
}

pub fn robustified_constraint(g: &BiAffineConstraint, rho: f64, norm: Norm) -> Result<RobustConstraint<'_>> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(CcpError::model(format!("Wasserstein radius must be ≥ 0, got {rho}")));
    }
    Ok(RobustConstraint { base: g, rho, norm })
}

impl RobustConstraint<'_> {
    pub fn margin(&self, x: &[f64]) -> f64 {
        if self.rho == 0.0 {
            return 0.0;
        }
        self.rho * dual_norm(&self.base.eval_a(x), self.norm)
    }

    pub fn eval(&self, x: &[f64], xi: &[f64]) -> f64 {
        self.base.eval(x, xi) + self.margin(x)
    }

    /// Appends the auxiliary columns and rows that linearize `ρ‖a(x)‖_*`
    /// and returns the margin as a linear expression.
    ///
    /// ℓ∞ dual: one `v ≥ 0` with `±a_r(x) ≤ v`. ℓ1 dual: one `u_r ≥ 0` per
    /// non-constant component with `±a_r(x) ≤ u_r`. Constant components
    /// enter as constants.
    pub fn embed_margin(&self, lp: &mut LpProblem) -> Result<LinearMargin> {
        let mut out = LinearMargin::default();
        if self.rho == 0.0 {
            return Ok(out);
        }
        let (constant, varying): (Vec<&AffineExpr>, Vec<&AffineExpr>) = self.base.a.iter().partition(|e| e.is_constant());
        match self.norm {
            Norm::L1 => {
                let floor = constant.iter().fold(0.0_f64, |m, e| m.max(e.constant.abs()));
                if varying.is_empty() {
                    out.constant = self.rho * floor;
                    return Ok(out);
                }
                let v = lp.add_variable(floor, f64::INFINITY, 0.0);
                for e in varying {
                    add_abs_rows(lp, e, v);
                }
                out.terms.push((v, self.rho));
            }
            Norm::Linf => {
                out.constant = self.rho * constant.iter().map(|e| e.constant.abs()).sum::<f64>();
                for e in varying {
                    let u = lp.add_variable(0.0, f64::INFINITY, 0.0);
                    add_abs_rows(lp, e, u);
                    out.terms.push((u, self.rho));
                }
            }
            Norm::L2 => {
                if !varying.is_empty() {
                    return Err(CcpError::UnsupportedInLp(Norm::L2));
                }
                out.constant = self.rho * constant.iter().map(|e| e.constant * e.constant).sum::<f64>().sqrt();
            }
        }
        Ok(out)
    }
}

/// `e(x) − y ≤ 0` and `−e(x) − y ≤ 0`.
fn add_abs_rows(lp: &mut LpProblem, e: &AffineExpr, y: usize) {
    let terms = super::merge_terms(e.terms.clone());
    let mut plus: SparseRow = terms.clone();
    plus.push((y, -1.0));
    lp.add_le(plus, -e.constant);
    let mut minus: SparseRow = terms.iter().map(|&(j, c)| (j, -c)).collect();
    minus.push((y, -1.0));
    lp.add_le(minus, e.constant);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::solve_lp;
    use proptest::prelude::*;

    fn constant_a(a: &[f64], b: f64) -> BiAffineConstraint {
        BiAffineConstraint::new(a.iter().map(|&v| AffineExpr::constant(v)).collect(), AffineExpr::constant(b))
    }

    #[test]
    fn closed_form_arithmetic() {
        let g = constant_a(&[1.0, -2.0], 0.5);
        let r = robustified_constraint(&g, 0.1, Norm::L1).unwrap();
        assert!((r.eval(&[], &[1.0, 1.0]) - (-0.3)).abs() < 1e-12);

        let g = constant_a(&[3.0], 0.0);
        let r = robustified_constraint(&g, 1.0, Norm::Linf).unwrap();
        assert_eq!(r.eval(&[], &[0.0]), 3.0);

        let g = constant_a(&[3.0, 4.0], 0.0);
        let r = robustified_constraint(&g, 2.0, Norm::L2).unwrap();
        assert!((r.eval(&[], &[0.0, 0.0]) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn negative_radius_is_rejected() {
        let g = constant_a(&[1.0], 0.0);
        assert!(robustified_constraint(&g, -0.5, Norm::L1).is_err());
    }

    #[test]
    fn l2_cannot_be_embedded() {
        let g = BiAffineConstraint::new(vec![AffineExpr::new(vec![(0, 1.0)], 0.0)], AffineExpr::default());
        let r = robustified_constraint(&g, 0.5, Norm::L2).unwrap();
        let mut lp = LpProblem::new();
        lp.add_variable(0.0, 1.0, 0.0);
        assert!(matches!(r.embed_margin(&mut lp), Err(CcpError::UnsupportedInLp(Norm::L2))));
        // point evaluation still works
        assert!((r.eval(&[2.0], &[1.0]) - 3.0).abs() < 1e-12);
    }

    /// Embedded margin minimized in an LP equals the closed form at a fixed x.
    #[test]
    fn embedded_margin_matches_closed_form() {
        let g = BiAffineConstraint::new(
            vec![AffineExpr::new(vec![(0, 2.0), (1, -1.0)], 0.5), AffineExpr::constant(-1.5), AffineExpr::new(vec![(1, 3.0)], -4.0)],
            AffineExpr::default(),
        );
        let x = [0.3, 0.8];
        for norm in [Norm::L1, Norm::Linf] {
            let r = robustified_constraint(&g, 0.7, norm).unwrap();
            let mut lp = LpProblem::new();
            for &v in &x {
                lp.add_variable(v, v, 0.0);
            }
            let m = r.embed_margin(&mut lp).unwrap();
            for &(j, c) in &m.terms {
                lp.objective[j] = c;
            }
            let sol = solve_lp(&lp).unwrap();
            assert!((sol.objective_value + m.constant - r.margin(&x)).abs() < 1e-9, "{norm:?}");
        }
    }

    proptest! {
        #[test]
        fn nondecreasing_in_radius(
            a in prop::collection::vec(-5.0..5.0f64, 1..6),
            b in -3.0..3.0f64,
            rho1 in 0.0..2.0f64,
            extra in 0.0..2.0f64,
            norm_ix in 0usize..3,
        ) {
            let norm = [Norm::L1, Norm::L2, Norm::Linf][norm_ix];
            let xi: Vec<f64> = a.iter().map(|v| v * 0.37 - 0.2).collect();
            let g = constant_a(&a, b);
            let lo = robustified_constraint(&g, rho1, norm).unwrap().eval(&[], &xi);
            let hi = robustified_constraint(&g, rho1 + extra, norm).unwrap().eval(&[], &xi);
            prop_assert!(hi >= lo);
            let zero = robustified_constraint(&g, 0.0, norm).unwrap().eval(&[], &xi);
            prop_assert!((zero - g.eval(&[], &xi)).abs() <= 1e-12);
        }

        /// `ρ‖a‖∞ = max { ζᵀa : ‖ζ‖₁ ≤ ρ }`, the maximizer sitting on a signed vertex.
        #[test]
        fn linf_is_dual_of_l1(
            a in prop::collection::vec(-10.0..10.0f64, 1..8),
            rho in 0.0..3.0f64,
        ) {
            let vertex_best = a
                .iter()
                .flat_map(|&v| [rho * v, -rho * v])
                .fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((rho * dual_norm(&a, Norm::L1) - vertex_best).abs() <= 1e-9);
        }
    }

    /// The same duality checked by solving `max ζᵀa, ‖ζ‖₁ ≤ ρ` as an LP on 1000 vectors.
    #[test]
    fn linf_dual_by_lp() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let k = rng.random_range(1..6);
            let a: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
            let rho = rng.random_range(0.0..2.0);
            // ζ = p − q with p, q ≥ 0 and Σ(p + q) ≤ ρ
            let mut lp = LpProblem::new();
            for &v in &a {
                lp.add_variable(0.0, f64::INFINITY, -v);
            }
            for &v in &a {
                lp.add_variable(0.0, f64::INFINITY, v);
            }
            lp.add_le((0..2 * k).map(|j| (j, 1.0)).collect(), rho);
            let sol = solve_lp(&lp).unwrap();
            assert!((-sol.objective_value - rho * dual_norm(&a, Norm::L1)).abs() < 1e-9);
        }
    }
}
