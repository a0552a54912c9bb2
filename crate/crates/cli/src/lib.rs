//! `ccopt` command-line front end.

pub mod commands;
pub mod io;
pub mod scenarios;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ccopt_core::solver::Method;
use ccopt_core::CcpError;

#[derive(Debug, Parser)]
#[command(name = "ccopt", version, about = "Joint chance-constrained optimization and reserve dispatch")]
pub struct Cli {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "ccopt-out")]
    pub out: PathBuf,
    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    AlsoX,
    AlsoXSingle,
    Intuitive,
    Cvar,
    Oracle,
    Mean,
    All,
}

impl MethodArg {
    pub fn expand(self, all: &[Method]) -> Vec<Method> {
        match self {
            MethodArg::AlsoX => vec![Method::AlsoXMulti],
            MethodArg::AlsoXSingle => vec![Method::AlsoXSingle],
            MethodArg::Intuitive => vec![Method::IntuitiveExtension],
            MethodArg::Cvar => vec![Method::CVaR],
            MethodArg::Oracle => vec![Method::Oracle],
            MethodArg::Mean => vec![Method::MeanScenario],
            MethodArg::All => all.to_vec(),
        }
    }
}

/// Short name used in file names and tables.
pub fn method_name(m: Method) -> &'static str {
    match m {
        Method::AlsoXMulti => "also-x",
        Method::AlsoXSingle => "also-x-single",
        Method::IntuitiveExtension => "intuitive",
        Method::CVaR => "cvar",
        Method::Oracle => "oracle",
        Method::MeanScenario => "mean",
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Tolerances {
    #[arg(long)]
    pub delta1: Option<f64>,
    #[arg(long)]
    pub delta2: Option<f64>,
    #[arg(long)]
    pub gamma_tol: Option<f64>,
    /// Lower objective bound for the bisection.
    #[arg(long, allow_negative_numbers = true)]
    pub f_lower: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub f_upper: Option<f64>,
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("--delta1", self.delta1), ("--delta2", self.delta2), ("--gamma-tol", self.gamma_tol)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    bail!("{name} must be a positive number, got {v}");
                }
            }
        }
        for (name, v) in [("--f-lower", self.f_lower), ("--f-upper", self.f_upper)] {
            if v.is_some_and(|v| !v.is_finite()) {
                bail!("{name} must be finite");
            }
        }
        Ok(())
    }
}

/// `--epsilon 0.1` sets every group; `--epsilon gen=0.05` or `--epsilon gen:g1=0.05` one kind or label.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonOverride {
    pub target: Option<String>,
    pub value: f64,
}

impl std::str::FromStr for EpsilonOverride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (target, value) = match s.rsplit_once('=') {
            Some((t, v)) => (Some(t.trim().to_string()), v),
            None => (None, s),
        };
        let value: f64 = value.trim().parse().map_err(|_| format!("`{s}`: risk level is not a number"))?;
        if !(0.0..1.0).contains(&value) {
            return Err(format!("`{s}`: risk level must lie in [0, 1)"));
        }
        Ok(Self { target, value })
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single interval constraint over five fixed scenarios, across a risk-level grid.
    Example1 {
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.2, 0.4, 0.6, 0.8])]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Two joint constraints over 20 uniform scenarios; convergence traces of both bisection methods.
    Example2 {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.8)]
        eps1: f64,
        #[arg(long, default_value_t = 0.2)]
        eps2: f64,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Solves a problem document.
    Solve {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::AlsoX)]
        method: MethodArg,
        #[arg(long = "epsilon")]
        epsilon: Vec<EpsilonOverride>,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Builds and solves a reserve dispatch case, runs audits and exports plot data.
    Dispatch {
        case: PathBuf,
        #[command(flatten)]
        run: DispatchArgs,
    },
    /// Radius sweep on a dispatch case (the bundled grid unless `--rho-grid` is given).
    Sweep {
        case: PathBuf,
        #[command(flatten)]
        run: DispatchArgs,
    },
    /// Held-out reliability of a solution bundle on a scenario CSV.
    Evaluate { report: PathBuf, scenarios: PathBuf },
    /// Writes seeded scenarios described by a generator spec.
    Generate { spec: PathBuf },
    /// Writes a bundled dispatch case or reference problem.
    Fixture {
        #[arg(value_enum)]
        name: FixtureName,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Risk level of the interval problem.
        #[arg(long, default_value_t = 0.4)]
        epsilon: f64,
        #[arg(long)]
        n_train: Option<usize>,
        #[arg(long)]
        n_test: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DispatchArgs {
    /// Wasserstein radius shared by every group.
    #[arg(long, conflicts_with = "rho_grid")]
    pub rho: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub rho_grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = MethodArg::AlsoX)]
    pub method: MethodArg,
    #[arg(long = "epsilon")]
    pub epsilon: Vec<EpsilonOverride>,
    #[command(flatten)]
    pub tol: Tolerances,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureName {
    ThreeBus,
    Overlapping,
    Random,
    /// The problem of `example1` at one risk level.
    Interval,
    /// The problem of `example2` for one seed.
    TwoGroup,
}

pub fn run(cli: &Cli) -> Result<()> {
    commands::run(cli)
}

/// 2 for numeric failures anywhere in the error chain, 1 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let numeric = err.chain().any(|e| matches!(e.downcast_ref::<CcpError>(), Some(CcpError::Numeric { .. })));
    if numeric {
        2
    } else {
        1
    }
}
