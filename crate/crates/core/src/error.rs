use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A step produced a non-finite value.
    #[error("numeric fault at step {step}: {detail}")]
    NumericFault { step: usize, detail: String },

    /// The regret bounds divide by 1 − γ.
    #[error("bound undefined at γ={gamma}")]
    BoundUndefined { gamma: f64 },

    #[error("unsupported problem: {0}")]
    UnsupportedProblem(String),

    /// A reproduced value drifted from its recorded golden.
    #[error("golden mismatch in {quantity}: expected {expected:e}, got {actual:e}")]
    GoldenMismatch {
        quantity: &'static str,
        expected: f64,
        actual: f64,
    },

    #[error("invalid hyperparameter `{field}`: {reason}")]
    InvalidHyperParam { field: &'static str, reason: String },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    /// Attach a step index to a numeric fault raised without one.
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            Error::NumericFault { detail, .. } => Error::NumericFault { step, detail },
            other => other,
        }
    }
}
