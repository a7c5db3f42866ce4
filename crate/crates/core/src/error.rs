use thiserror::Error;

/// Failure modes of the solver stack.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible state {state:?}: {reason}")]
    Domain { reason: String, state: Vec<f64> },

    #[error("model error: {0}")]
    Model(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical blow-up in cell {cell} at t = {time:.6e}")]
    BlowUp { cell: usize, time: f64 },

    #[error("flux inversion did not converge after {iterations} iterations (residual {residual:.3e})")]
    Inversion { iterations: usize, residual: f64 },

    #[error("reverse march failed: {0}")]
    March(String),

    #[error("boundary error: {0}")]
    Boundary(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit status: 2 for configuration problems, 3 for numerical
    /// failures of the scheme or boundary march, 4 for flux inversion.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Unsupported(_) => 2,
            Error::Domain { .. } | Error::Model(_) | Error::BlowUp { .. } | Error::March(_) | Error::Boundary(_) => 3,
            Error::Inversion { .. } => 4,
        }
    }

    pub(crate) fn domain(reason: impl Into<String>, state: &crate::StateVec) -> Self {
        Error::Domain {
            reason: reason.into(),
            state: state.as_slice().to_vec(),
        }
    }
}
