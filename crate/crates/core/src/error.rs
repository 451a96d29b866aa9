use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DmcpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("root finder did not converge after {iterations} iterations (residual norm {residual_norm:.3e})")]
    NoConvergence { iterations: usize, residual_norm: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("requested detuning {requested:.6} is outside the reachable range (max |Δ| = {max_attainable:.6})")]
    OutOfRange { requested: f64, max_attainable: f64 },

    #[error("matrix is not special unitary (deviation {0:.3e})")]
    NotSpecialUnitary(f64),

    #[error("calibration data: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, DmcpError>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(DmcpError::InvalidInput(format!("{name} must be finite, got {value}")))
    }
}
