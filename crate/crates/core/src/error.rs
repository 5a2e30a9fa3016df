use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrality constraint violated: {0}")]
    Integrality(String),

    #[error("saddle point equation has no interior solution: {0}")]
    DegenerateSaddle(String),

    #[error("saddle solver did not converge at eta={eta}, gamma={gamma}: {reason}")]
    NoConvergence { eta: f64, gamma: f64, reason: String },

    #[error("dominance verdict is not monotone in r: {0}")]
    NonMonotone(String),

    #[error("search bracket invalid: {0}")]
    Bracket(String),

    #[error("instance too large: {0}")]
    CapExceeded(String),

    #[error("retry budget of {0} attempts exhausted without a simple formula")]
    RetryBudget(usize),

    #[error("DIMACS parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Integrality(_) => "integrality",
            Error::DegenerateSaddle(_) => "degenerate_saddle",
            Error::NoConvergence { .. } => "no_convergence",
            Error::NonMonotone(_) => "non_monotone",
            Error::Bracket(_) => "bracket",
            Error::CapExceeded(_) => "cap_exceeded",
            Error::RetryBudget(_) => "retry_budget",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }
}
