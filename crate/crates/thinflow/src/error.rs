//! Error type shared across the crate.

use std::fmt;

#[derive(Debug)]
pub enum SimError {
    /// A scalar argument is out of its admissible range (non-finite, nonpositive, ...).
    Parameter(String),
    /// A configuration or input violates a documented invariant.
    Validation(String),
    /// An internal contract was broken (shape mismatch, indefinite operator, ...).
    Contract(String),
    /// An iterative solve failed; carries the last relative residual.
    Solver { message: String, residual: f64 },
    /// A transport step was requested with a time step above the stability limit.
    CflViolation { dt: f64, dt_limit: f64 },
    /// The discrete mass balance of an accepted step broke the audit threshold.
    Conservation { residual: f64 },
    /// A file did not match the expected on-disk format.
    Format { line: usize, message: String },
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::Parameter(msg) => write!(f, "parameter error: {msg}"),
            SimError::Validation(msg) => write!(f, "validation error: {msg}"),
            SimError::Contract(msg) => write!(f, "contract violation: {msg}"),
            SimError::Solver { message, residual } => {
                write!(f, "solver error: {message} (relative residual {residual:e})")
            }
            SimError::CflViolation { dt, dt_limit } => write!(
                f,
                "time step {dt:e} exceeds the CFL limit; retry with dt <= {dt_limit:e}"
            ),
            SimError::Conservation { residual } => {
                write!(f, "mass balance violated: audit residual {residual:e}")
            }
            SimError::Format { line, message } => write!(f, "format error at line {line}: {message}"),
            SimError::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for SimError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            SimError::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<std::io::Error> for SimError {
    fn from(err: std::io::Error) -> Self {
        SimError::Io(err)
    }
}

impl SimError {
    /// Process exit code: 1 for bad input, 2 for runtime/solver failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            SimError::Parameter(_)
            | SimError::Validation(_)
            | SimError::Contract(_)
            | SimError::Format { .. } => 1,
            SimError::Solver { .. }
            | SimError::CflViolation { .. }
            | SimError::Conservation { .. }
            | SimError::Io(_) => 2,
        }
    }
}
