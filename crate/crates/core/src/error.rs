use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("closed-form parameters are only defined for built-in topologies, got {0}")]
    UnsupportedTopology(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("positivity violated at t = {t}: minimum eigenvalue {min_eigenvalue:e}")]
    PositivityViolation { t: f64, min_eigenvalue: f64 },

    #[error("integration diverged at t = {t} (non-finite state)")]
    Divergence { t: f64 },

    #[error("adaptive step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },

    #[error("sweep cell theta = {theta} failed: {source}")]
    SweepCell {
        theta: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("failed to build worker pool: {0}")]
    WorkerPool(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Simulation time at which a numerical failure happened, if any.
    pub fn failure_time(&self) -> Option<f64> {
        match self {
            Error::PositivityViolation { t, .. } | Error::Divergence { t } | Error::StepSizeUnderflow { t } => Some(*t),
            Error::SweepCell { source, .. } => source.failure_time(),
            _ => None,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::PositivityViolation { .. } | Error::Divergence { .. } | Error::StepSizeUnderflow { .. } => true,
            Error::SweepCell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
