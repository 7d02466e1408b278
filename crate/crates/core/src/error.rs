use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// R or S dropped below the collision floor.
    #[error("collision at t = {t}: R = {r}, S = {s} (floor {floor})")]
    Collision { t: f64, r: f64, s: f64, floor: f64 },

    /// The adaptive controller asked for a step below `min_step`.
    #[error("step size underflow at t = {t}: required step {step:e} < min_step {min_step:e}")]
    StepSizeUnderflow { t: f64, step: f64, min_step: f64 },

    #[error("Newton corrector did not converge after {iterations} iterations (residual {residual:e}){}", cause.as_ref().map(|c| format!(": {c}")).unwrap_or_default())]
    NoConvergence {
        iterations: usize,
        residual: f64,
        cause: Option<String>,
    },

    #[error("augmented Jacobian is singular (condition number {condition:e})")]
    SingularJacobian { condition: f64 },

    /// The corrected point moved farther from the predictor than allowed.
    #[error("corrector moved {distance:e}, more than the allowed {limit:e}")]
    CorrectorDrift { distance: f64, limit: f64 },

    #[error("tangent field vanishes (relative norm {relative_norm:e})")]
    ZeroTangent { relative_norm: f64 },

    #[error("no interior minimum: argmin at branch index {index} of {len}")]
    NoInteriorMinimum { index: usize, len: usize },

    #[error("target {target} outside the range [{lo}, {hi}] covered by the branch")]
    TargetOutOfRange { target: f64, lo: f64, hi: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// Stable short identifier, used by the CLI on its diagnostic stream.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Collision { .. } => "collision",
            Error::StepSizeUnderflow { .. } => "step-size-underflow",
            Error::NoConvergence { .. } => "no-convergence",
            Error::SingularJacobian { .. } => "singular-jacobian",
            Error::CorrectorDrift { .. } => "corrector-drift",
            Error::ZeroTangent { .. } => "zero-tangent",
            Error::NoInteriorMinimum { .. } => "no-interior-minimum",
            Error::TargetOutOfRange { .. } => "target-out-of-range",
            Error::InvalidInput(_) => "invalid-input",
            Error::Parse { .. } => "parse",
        }
    }

    /// Time reached before an integration failure, if the error carries one.
    pub fn time_reached(&self) -> Option<f64> {
        match self {
            Error::Collision { t, .. } | Error::StepSizeUnderflow { t, .. } => Some(*t),
            _ => None,
        }
    }
}
