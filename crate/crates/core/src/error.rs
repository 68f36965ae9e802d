use crate::sim::TrajectoryRecord;

/// Error type for the whole crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A state no longer satisfies its type invariant.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Integration stopped because a runtime invariant broke. Carries the
    /// trajectory recorded up to the breach.
    #[error("run aborted at t = {t}: {reason}")]
    AbortedRun {
        t: f64,
        reason: String,
        partial: Box<TrajectoryRecord>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A tabulated curve file could not be parsed.
    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::InvariantViolation(msg.into())
    }
}
