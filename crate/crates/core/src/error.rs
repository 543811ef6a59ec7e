use thiserror::Error;

/// Errors raised by the geometry, flow and energy layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),

    #[error("singular metric: minimum eigenvalue {min_eigenvalue:.3e} at point {point}")]
    SingularMetric { min_eigenvalue: f64, point: usize },

    #[error("valence mismatch: {0}")]
    ValenceMismatch(String),

    #[error("{check}: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ToleranceExceeded {
        check: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("extinction reached: last valid time {last_time}")]
    ExtinctionReached { last_time: f64 },

    #[error("step rejected at t = {time}: {reason}")]
    StepRejected { time: f64, reason: String },

    #[error("cutoff/weight invariant `{bound}` violated at point {point}: {detail}")]
    InvariantViolation {
        bound: String,
        point: usize,
        detail: String,
    },

    #[error("t = {t} outside the weight validity window [0, {tau}]")]
    OutsideValidityWindow { t: f64, tau: f64 },

    #[error("unstable constant `{name}`: fitted values {values:?}")]
    UnstableConstant { name: String, values: Vec<f64> },

    #[error("empty certificate window: t0 = {t0}, window end = {window_end}")]
    WindowEmpty { t0: f64, window_end: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed field data: {0}")]
    Format(String),
}

impl LabError {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        LabError::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by the geometry degenerating rather than by a
    /// failed check.
    pub fn is_numerical_breakdown(&self) -> bool {
        matches!(
            self,
            LabError::SingularMetric { .. }
                | LabError::ExtinctionReached { .. }
                | LabError::StepRejected { .. }
        )
    }
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
