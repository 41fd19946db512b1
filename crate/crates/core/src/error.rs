use thiserror::Error;

/// Errors raised by the pricing engines and the command-line front end.
#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a precondition (negative coordinate, bad rate, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve broke down or an iteration diverged.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The projected SOR iteration did not reach its tolerance.
    #[error("PSOR did not converge at time step {step} after {iterations} iterations (last change {residual:.3e})")]
    Psor {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    /// The cap schedule ran out of rounds before successive surfaces agreed.
    #[error("cap schedule exhausted after {} rounds (last difference {:.3e})", .history.len() + 1, .history.last().copied().unwrap_or(f64::NAN))]
    Convergence { history: Vec<f64> },

    /// Malformed or inconsistent run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status: 2 for bad input, 3 for numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Io(_) => 2,
            Error::Numeric(_) | Error::Psor { .. } | Error::Convergence { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
