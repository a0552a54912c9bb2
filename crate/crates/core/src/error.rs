use thiserror::Error;

use crate::model::Norm;

/// Errors raised by the LP layer, the model layer and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CcpError {
    /// Structurally invalid input: dimension mismatches, out-of-range parameters.
    #[error("model error: {0}")]
    Model(String),

    /// The simplex exceeded its iteration budget or lost numerical accuracy.
    #[error("numeric failure: {message} (after {iterations} iterations, {rows} rows x {cols} cols)")]
    Numeric { message: String, iterations: usize, rows: usize, cols: usize },

    #[error("enumeration of {required} scenario combinations exceeds the limit of {limit}")]
    Capacity { required: u128, limit: u128 },

    #[error("the dual of the {0:?} uncertainty norm cannot be embedded in a linear program")]
    UnsupportedInLp(Norm),
}

impl CcpError {
    pub fn model(msg: impl Into<String>) -> Self {
        CcpError::Model(msg.into())
    }
}

pub type Result<T, E = CcpError> = std::result::Result<T, E>;
