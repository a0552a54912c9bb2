//! Case-file types. Units: MW, MWh, $/MWh, hours.

use serde::{Deserialize, Serialize};

use ccopt_core::{CcpError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    #[serde(default)]
    pub name: String,
    /// Fixed load `P^fix_{i,t}` per period.
    pub load: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reactance: Option<f64>,
    pub capacity: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    #[serde(default)]
    pub lines: Vec<Line>,
    /// `ψ[l][i]`: change of flow on line `l` (from → to) per MW injected at bus `i`
    /// and withdrawn at the slack bus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ptdf: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub slack: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    #[serde(default)]
    pub name: String,
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    /// Downward ramp rate in MW/h, stored as a number ≤ 0.
    pub ramp_dn: f64,
    pub ramp_up: f64,
    /// `(width, marginal cost)` blocks stacked above `p_min`.
    pub segments: Vec<(f64, f64)>,
    #[serde(default)]
    pub fixed_cost: f64,
    pub reserve_cost_up: f64,
    pub reserve_cost_dn: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub rho: f64,
}

/// One realization of an ADN's power-energy boundary over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub p_lower: Vec<f64>,
    pub p_upper: Vec<f64>,
    pub e_lower: Vec<f64>,
    pub e_upper: Vec<f64>,
}

impl BoundarySample {
    /// Flattened as `Pᴸ[1..T], Pᵁ[1..T], Eᴸ[1..T], Eᵁ[1..T]`.
    pub fn to_row(&self) -> Vec<f64> {
        [&self.p_lower, &self.p_upper, &self.e_lower, &self.e_upper].into_iter().flatten().copied().collect()
    }

    pub fn from_row(row: &[f64], horizon: usize) -> Result<Self> {
        if row.len() != 4 * horizon {
            return Err(CcpError::model(format!("boundary row has {} values, expected 4·T = {}", row.len(), 4 * horizon)));
        }
        let part = |k: usize| row[k * horizon..(k + 1) * horizon].to_vec();
        Ok(Self { p_lower: part(0), p_upper: part(1), e_lower: part(2), e_upper: part(3) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adn {
    #[serde(default)]
    pub name: String,
    pub bus: usize,
    #[serde(default)]
    pub boundary_samples: Vec<BoundarySample>,
    /// CSV with one boundary row per scenario; read by the loader.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_csv: Option<String>,
    /// Held-out realizations for reliability evaluation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_boundary_samples: Vec<BoundarySample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_boundary_csv: Option<String>,
    pub reserve_cost_up: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindFarm {
    #[serde(default)]
    pub name: String,
    pub bus: usize,
    pub forecast: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WindScenarioSet {
    #[serde(default)]
    pub farms: Vec<WindFarm>,
    /// One row per scenario, `ξ_{w,t}` in row-major farm-then-period order.
    #[serde(default)]
    pub errors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub errors_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub test_errors: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_errors_csv: Option<String>,
}

impl WindScenarioSet {
    pub fn error(&self, row: &[f64], w: usize, t: usize, horizon: usize) -> f64 {
        row[w * horizon + t]
    }
}

/// Direction of the lower capacity constraint with down reserve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DownCapacity {
    /// `P − R^dn ≥ P^min`.
    #[default]
    Physical,
    /// `P − R^dn ≤ P^min`.
    Reversed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Custom,
    /// `T = 24`, `ΔT = 1 h`.
    DayAhead,
    /// `T = 4`, `ΔT = 0.25 h`.
    Intraday,
}

impl Preset {
    pub fn horizon_and_step(self) -> Option<(usize, f64)> {
        match self {
            Preset::Custom => None,
            Preset::DayAhead => Some((24, 1.0)),
            Preset::Intraday => Some((4, 0.25)),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CaseOptions {
    #[serde(default)]
    pub preset: Preset,
    #[serde(default)]
    pub down_capacity: DownCapacity,
    /// Fallback bisection bounds when the mean-scenario problem is infeasible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_upper: Option<f64>,
    /// Bisection tolerance overrides.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchCase {
    #[serde(default)]
    pub name: String,
    pub horizon: usize,
    /// `ΔT` in hours.
    pub step: f64,
    pub network: Network,
    pub generators: Vec<Generator>,
    #[serde(default)]
    pub adns: Vec<Adn>,
    #[serde(default)]
    pub wind: WindScenarioSet,
    #[serde(default)]
    pub options: CaseOptions,
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CcpError::Model(msg()))
    }
}

fn check_risk(what: &str, epsilon: f64, rho: f64) -> Result<()> {
    check((0.0..1.0).contains(&epsilon), || format!("{what}: risk level {epsilon} outside [0, 1)"))?;
    check(rho >= 0.0 && rho.is_finite(), || format!("{what}: Wasserstein radius {rho} must be ≥ 0"))
}

fn check_len(what: &str, v: &[f64], horizon: usize) -> Result<()> {
    check(v.len() == horizon, || format!("{what} has {} periods, expected {horizon}", v.len()))?;
    check(v.iter().all(|x| x.is_finite()), || format!("{what} contains a non-finite value"))
}

impl DispatchCase {
    pub fn num_buses(&self) -> usize {
        self.network.buses.len()
    }

    /// Number of training scenarios shared by every group.
    pub fn num_scenarios(&self) -> usize {
        if !self.wind.errors.is_empty() {
            self.wind.errors.len()
        } else {
            self.adns.first().map_or(1, |a| a.boundary_samples.len().max(1))
        }
    }

    /// Wind error rows, or a single all-zero scenario when none are given.
    pub fn wind_rows(&self) -> Vec<Vec<f64>> {
        if self.wind.errors.is_empty() {
            vec![vec![0.0; self.wind.farms.len() * self.horizon]; self.num_scenarios()]
        } else {
            self.wind.errors.clone()
        }
    }

    /// Number of held-out scenarios, 0 when the case carries none.
    pub fn num_test_scenarios(&self) -> usize {
        if !self.wind.test_errors.is_empty() {
            self.wind.test_errors.len()
        } else {
            self.adns.first().map_or(0, |a| a.test_boundary_samples.len())
        }
    }

    /// Whether held-out scenarios are available for every uncertain source.
    pub fn has_test_set(&self) -> bool {
        let n = self.num_test_scenarios();
        n > 0
            && (self.wind.farms.is_empty() || self.wind.test_errors.len() == n)
            && self.adns.iter().all(|a| a.test_boundary_samples.len() == n)
    }

    pub fn wind_test_rows(&self) -> Vec<Vec<f64>> {
        if self.wind.test_errors.is_empty() {
            vec![vec![0.0; self.wind.farms.len() * self.horizon]; self.num_test_scenarios()]
        } else {
            self.wind.test_errors.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.horizon;
        check(t > 0, || "horizon must be ≥ 1".into())?;
        check(self.step > 0.0 && self.step.is_finite(), || format!("step {} must be > 0", self.step))?;
        if let Some((pt, ps)) = self.options.preset.horizon_and_step() {
            check(pt == t && ps == self.step, || format!("preset {:?} requires horizon {pt} and step {ps}", self.options.preset))?;
        }
        let nb = self.num_buses();
        check(nb > 0, || "network has no buses".into())?;
        check(self.network.slack < nb, || format!("slack bus {} out of range", self.network.slack))?;
        for (i, b) in self.network.buses.iter().enumerate() {
            check_len(&format!("bus {i} load"), &b.load, t)?;
        }
        for (l, line) in self.network.lines.iter().enumerate() {
            check(line.from < nb && line.to < nb && line.from != line.to, || format!("line {l} has invalid endpoints"))?;
            check(line.capacity >= 0.0, || format!("line {l} capacity must be ≥ 0"))?;
            check_risk(&format!("line {l}"), line.epsilon, line.rho)?;
        }
        match &self.network.ptdf {
            Some(m) => {
                check(m.len() == self.network.lines.len(), || format!("ptdf has {} rows for {} lines", m.len(), self.network.lines.len()))?;
                for (l, row) in m.iter().enumerate() {
                    check(row.len() == nb, || format!("ptdf row {l} has {} columns for {nb} buses", row.len()))?;
                    check(row.iter().all(|v| v.is_finite()), || format!("ptdf row {l} contains a non-finite value"))?;
                }
            }
            None => {
                let bare: Vec<String> =
                    self.network.lines.iter().enumerate().filter(|(_, l)| l.reactance.is_none()).map(|(i, _)| i.to_string()).collect();
                check(bare.is_empty(), || {
                    format!("at /network/ptdf: network.ptdf is missing and lines {} have no reactance", bare.join(", "))
                })?
            }
        }
        check(!self.generators.is_empty(), || "case has no generators".into())?;
        for (g, gen) in self.generators.iter().enumerate() {
            let what = format!("generator {g}");
            check(gen.bus < nb, || format!("{what}: bus {} out of range", gen.bus))?;
            check(gen.p_min <= gen.p_max, || format!("{what}: p_min > p_max"))?;
            check(gen.ramp_dn <= 0.0 && gen.ramp_up >= 0.0, || format!("{what}: ramp_dn must be ≤ 0 ≤ ramp_up"))?;
            check(!gen.segments.is_empty(), || format!("{what}: no cost segments"))?;
            check(gen.segments.iter().all(|&(w, _)| w >= 0.0), || format!("{what}: negative segment width"))?;
            check(gen.segments.windows(2).all(|p| p[0].1 <= p[1].1), || format!("{what}: segment marginal costs must be nondecreasing"))?;
            let width: f64 = gen.segments.iter().map(|s| s.0).sum();
            check((width - (gen.p_max - gen.p_min)).abs() <= 1e-6 * (1.0 + gen.p_max.abs()), || {
                format!("{what}: segment widths sum to {width}, expected p_max − p_min = {}", gen.p_max - gen.p_min)
            })?;
            check(gen.reserve_cost_up >= 0.0 && gen.reserve_cost_dn >= 0.0, || format!("{what}: negative reserve cost"))?;
            check_risk(&what, gen.epsilon, gen.rho)?;
        }
        let wt = self.wind.farms.len() * t;
        for (w, farm) in self.wind.farms.iter().enumerate() {
            check(farm.bus < nb, || format!("wind farm {w}: bus {} out of range", farm.bus))?;
            check_len(&format!("wind farm {w} forecast"), &farm.forecast, t)?;
        }
        for (name, rows) in [("wind.errors", &self.wind.errors), ("wind.test_errors", &self.wind.test_errors)] {
            for (i, row) in rows.iter().enumerate() {
                check(row.len() == wt, || format!("{name} row {i} has {} values, expected W·T = {wt}", row.len()))?;
                check(row.iter().all(|v| v.is_finite()), || format!("{name} row {i} contains a non-finite value"))?;
            }
        }
        let n = self.num_scenarios();
        for (d, adn) in self.adns.iter().enumerate() {
            let what = format!("adn {d}");
            check(adn.bus < nb, || format!("{what}: bus {} out of range", adn.bus))?;
            check(adn.boundary_samples.len() == n, || {
                format!("{what}: {} boundary samples but {n} wind scenarios", adn.boundary_samples.len())
            })?;
            for (set, samples) in [("boundary_samples", &adn.boundary_samples), ("test_boundary_samples", &adn.test_boundary_samples)] {
                for (i, s) in samples.iter().enumerate() {
                    let at = format!("{what} {set}[{i}]");
                    check_len(&format!("{at}.p_lower"), &s.p_lower, t)?;
                    check_len(&format!("{at}.p_upper"), &s.p_upper, t)?;
                    check_len(&format!("{at}.e_lower"), &s.e_lower, t)?;
                    check_len(&format!("{at}.e_upper"), &s.e_upper, t)?;
                    check(s.p_lower.iter().zip(&s.p_upper).all(|(a, b)| a <= b), || format!("{at}: p_lower > p_upper"))?;
                    check(s.e_lower.iter().zip(&s.e_upper).all(|(a, b)| a <= b), || format!("{at}: e_lower > e_upper"))?;
                }
            }
            check(adn.reserve_cost_up >= 0.0, || format!("{what}: negative reserve cost"))?;
            check_risk(&what, adn.epsilon, adn.rho)?;
        }
        if !self.wind.test_errors.is_empty() {
            for (d, adn) in self.adns.iter().enumerate() {
                check(adn.test_boundary_samples.is_empty() || adn.test_boundary_samples.len() == self.wind.test_errors.len(), || {
                    format!("adn {d}: test boundary count differs from wind test scenario count")
                })?;
            }
        }
        Ok(())
    }
}
