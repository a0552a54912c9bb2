//! Post-solve checks on a dispatch, computed from the case data rather than the LP rows.

use serde::{Deserialize, Serialize};

use crate::build::{aggregate_errors, BuiltDispatch};
use crate::case::DispatchCase;

pub const BALANCE_TOL: f64 = 1e-6;
pub const PARTITION_TOL: f64 = 1e-9;
pub const FACTOR_FLOOR: f64 = -1e-12;
pub const SEGMENT_TOL: f64 = 1e-9;
pub const ORDER_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// `max_t |Σ_g P + Σ_w P_w − Σ_d P_d − Σ_i P^fix|`.
    pub balance_residual: f64,
    pub alpha_plus_residual: f64,
    pub alpha_minus_residual: f64,
    pub min_factor: f64,
    /// `max |P^min + Σ_s P_s − P|`.
    pub segment_residual: f64,
    /// Largest amount by which a costlier segment is used while a cheaper one has room.
    pub segment_order_violation: f64,
    /// `max |Ω⁺ Ω⁻|` over training and test scenarios.
    pub omega_product: f64,
    pub failures: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn audit_dispatch(case: &DispatchCase, built: &BuiltDispatch, x: &[f64]) -> AuditReport {
    let idx = &built.index;
    let nt = case.horizon;
    let mut balance = 0.0_f64;
    let mut a_plus = 0.0_f64;
    let mut a_minus = 0.0_f64;
    let mut min_factor = f64::INFINITY;
    let mut seg_res = 0.0_f64;
    let mut order = 0.0_f64;
    for t in 0..nt {
        let gen: f64 = idx.generators.iter().map(|g| x[g.p[t]]).sum();
        let wind: f64 = case.wind.farms.iter().map(|w| w.forecast[t]).sum();
        let adn: f64 = idx.adns.iter().map(|d| x[d.p[t]]).sum();
        let load: f64 = case.network.buses.iter().map(|b| b.load[t]).sum();
        balance = balance.max((gen + wind - adn - load).abs());

        let sum_plus: f64 = idx.generators.iter().map(|g| x[g.alpha_plus[t]]).sum();
        let sum_minus: f64 =
            idx.generators.iter().map(|g| x[g.alpha_minus[t]]).sum::<f64>() + idx.adns.iter().map(|d| x[d.alpha_plus[t]]).sum::<f64>();
        a_plus = a_plus.max((sum_plus - 1.0).abs());
        a_minus = a_minus.max((sum_minus - 1.0).abs());
        for g in &idx.generators {
            min_factor = min_factor.min(x[g.alpha_plus[t]]).min(x[g.alpha_minus[t]]);
        }
        for d in &idx.adns {
            min_factor = min_factor.min(x[d.alpha_plus[t]]);
        }

        for (gen, gi) in case.generators.iter().zip(&idx.generators) {
            let total: f64 = gi.segments.iter().map(|s| x[s[t]]).sum();
            seg_res = seg_res.max((gen.p_min + total - x[gi.p[t]]).abs());
            for s in 0..gen.segments.len().saturating_sub(1) {
                if gen.segments[s].1 < gen.segments[s + 1].1 {
                    let room = gen.segments[s].0 - x[gi.segments[s][t]];
                    let next = x[gi.segments[s + 1][t]];
                    order = order.max(room.min(next));
                }
            }
        }
    }
    if !min_factor.is_finite() {
        min_factor = 0.0;
    }

    let farms = case.wind.farms.len();
    let mut omega = 0.0_f64;
    for rows in [case.wind_rows(), case.wind_test_rows()] {
        let agg = aggregate_errors(&rows, farms, nt);
        for (p, m) in agg.plus.iter().zip(&agg.minus) {
            for (a, b) in p.iter().zip(m) {
                omega = omega.max((a * b).abs());
            }
        }
    }

    let mut failures = Vec::new();
    if balance > BALANCE_TOL {
        failures.push(format!("power balance residual {balance:e} exceeds {BALANCE_TOL:e}"));
    }
    if a_plus > PARTITION_TOL || a_minus > PARTITION_TOL {
        failures.push(format!("participation factor sums off by {a_plus:e} / {a_minus:e}"));
    }
    if min_factor < FACTOR_FLOOR {
        failures.push(format!("negative participation factor {min_factor:e}"));
    }
    if seg_res > SEGMENT_TOL {
        failures.push(format!("segment sum residual {seg_res:e}"));
    }
    if order > ORDER_TOL {
        failures.push(format!("costlier segment used ahead of a cheaper one by {order:e} MW"));
    }
    if omega != 0.0 {
        failures.push(format!("positive and negative error aggregates overlap: {omega:e}"));
    }
    AuditReport {
        balance_residual: balance,
        alpha_plus_residual: a_plus,
        alpha_minus_residual: a_minus,
        min_factor,
        segment_residual: seg_res,
        segment_order_violation: order,
        omega_product: omega,
        failures,
    }
}
