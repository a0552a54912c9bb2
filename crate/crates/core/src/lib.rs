//! Joint chance-constrained linear programming.
//!
//! * [`lp`]: LP representation and the bundled bounded simplex.
//! * [`model`]: problems with several joint chance constraints and Wasserstein robustification.
//! * [`solver`]: ALSO-X style bisection, the intuitive extension, CVaR and exhaustive baselines.

pub mod error;
pub mod instances;
pub mod lp;
pub mod model;
pub mod solver;

pub use error::{CcpError, Result};
