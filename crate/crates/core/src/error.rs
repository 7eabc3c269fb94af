use thiserror::Error;

/// Errors raised by the analytic and simulation layers.
///
/// Every variant carries the module that produced it so callers (notably the
/// CLI) can report module-tagged messages.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("[{module}] domain error: {message}")]
    Domain {
        module: &'static str,
        message: String,
    },

    #[error("[{module}] evaluation failure: {message}")]
    EvaluationFailure {
        module: &'static str,
        message: String,
    },

    #[error("[{module}] routing error: {message}")]
    Routing {
        module: &'static str,
        message: String,
    },

    /// An alternating sum lost more significant digits than the budget allows.
    #[error("[{module}] precision loss: {lost_digits:.1} digits lost (budget {budget:.1}); {advice}")]
    Precision {
        module: &'static str,
        lost_digits: f64,
        budget: f64,
        advice: &'static str,
    },

    #[error("[{module}] quadrature did not converge: {message}")]
    Quadrature {
        module: &'static str,
        message: String,
    },

    #[error("[sim] explosion guard exceeded: {count} events (guard {guard})")]
    ExplosionGuard { count: u64, guard: u64 },

    #[error("[sim] insufficient sample: {message}")]
    InsufficientSample { message: String },
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Domain { module, .. }
            | Error::EvaluationFailure { module, .. }
            | Error::Routing { module, .. }
            | Error::Precision { module, .. }
            | Error::Quadrature { module, .. } => module,
            Error::ExplosionGuard { .. } | Error::InsufficientSample { .. } => "sim",
        }
    }

    pub(crate) fn domain(module: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn eval(module: &'static str, message: impl Into<String>) -> Self {
        Error::EvaluationFailure {
            module,
            message: message.into(),
        }
    }

    pub(crate) fn routing(module: &'static str, message: impl Into<String>) -> Self {
        Error::Routing {
            module,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
