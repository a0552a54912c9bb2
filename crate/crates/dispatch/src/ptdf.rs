use nalgebra::DMatrix;

use crate::case::Network;
use ccopt_core::{CcpError, Result};

/// DC power-transfer distribution factors relative to `network.slack`.
///
/// Entry `[l][i]` is the flow on line `l`, positive from `from` to `to`,
/// caused by injecting 1 MW at bus `i` and withdrawing it at the slack bus.
/// The slack column is zero.
pub fn compute_ptdf(network: &Network) -> Result<Vec<Vec<f64>>> {
    let n = network.buses.len();
    let slack = network.slack;
    if slack >= n {
        return Err(CcpError::model(format!("slack bus {slack} out of range")));
    }
    let mut susceptance = Vec::with_capacity(network.lines.len());
    for (l, line) in network.lines.iter().enumerate() {
        let x = line.reactance.ok_or_else(|| CcpError::model(format!("network.lines[{l}].reactance is required to compute the ptdf")))?;
        if !(x.is_finite() && x != 0.0) {
            return Err(CcpError::model(format!("network.lines[{l}].reactance must be finite and nonzero")));
        }
        if line.from >= n || line.to >= n {
            return Err(CcpError::model(format!("line {l} has an endpoint outside the bus list")));
        }
        susceptance.push(1.0 / x);
    }
    check_connected(network)?;
    if n == 1 {
        return Ok(vec![vec![0.0]; network.lines.len()]);
    }

    // reduced nodal susceptance matrix without the slack row and column
    let reduced = |i: usize| {
        if i < slack {
            Some(i)
        } else if i > slack {
            Some(i - 1)
        } else {
            None
        }
    };
    let mut b = DMatrix::<f64>::zeros(n - 1, n - 1);
    for (line, &y) in network.lines.iter().zip(&susceptance) {
        let (f, t) = (reduced(line.from), reduced(line.to));
        if let Some(f) = f {
            b[(f, f)] += y;
        }
        if let Some(t) = t {
            b[(t, t)] += y;
        }
        if let (Some(f), Some(t)) = (f, t) {
            b[(f, t)] -= y;
            b[(t, f)] -= y;
        }
    }
    let x = b.lu().try_inverse().ok_or_else(|| CcpError::model("network susceptance matrix is singular"))?;
    let angle = |bus: usize, inj: usize| match (reduced(bus), reduced(inj)) {
        (Some(a), Some(b)) => x[(a, b)],
        _ => 0.0,
    };
    Ok(network
        .lines
        .iter()
        .zip(&susceptance)
        .map(|(line, &y)| (0..n).map(|i| y * (angle(line.from, i) - angle(line.to, i))).collect())
        .collect())
}

fn check_connected(network: &Network) -> Result<()> {
    let n = network.buses.len();
    let mut adj = vec![Vec::new(); n];
    for line in &network.lines {
        adj[line.from].push(line.to);
        adj[line.to].push(line.from);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![network.slack];
    seen[network.slack] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(CcpError::model(format!("network is disconnected: bus {i} is unreachable from the slack bus"))),
        None => Ok(()),
    }
}

/// The case's PTDF, computed from reactances when not given.
pub fn resolve_ptdf(network: &Network) -> Result<Vec<Vec<f64>>> {
    match &network.ptdf {
        Some(m) => Ok(m.clone()),
        None => compute_ptdf(network),
    }
}
