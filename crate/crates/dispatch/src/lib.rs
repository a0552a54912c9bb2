//! Multiperiod dispatch with generators, active distribution networks and
//! wind farms, compiled into a joint chance-constrained program.

pub mod audit;
pub mod build;
pub mod case;
pub mod fixtures;
pub mod ptdf;
pub mod study;

pub use audit::{audit_dispatch, AuditReport};
pub use build::{
    aggregate_errors, build_ccp, build_ccp_with, device_label, BuildOptions, BuiltDispatch, ErrorAggregates, GroupKind, VarIndex,
};
pub use case::{Adn, BoundarySample, DispatchCase, Generator, Network, WindScenarioSet};
pub use ptdf::compute_ptdf;
pub use study::{deterministic_dispatch, rho_sweep, solve_dispatch, DispatchOutcome, SweepRow};
