use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain where an operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical routine failed to meet its tolerance.
    #[error("numerical failure: {message} ({diagnostics})")]
    Numerical { message: String, diagnostics: String },

    /// No return was found within the integration horizon.
    #[error("no return within horizon T_max = {t_max}")]
    Horizon { t_max: f64 },

    /// A documented precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Sampled quantities disagree where they are required to agree.
    #[error("inconsistent samples: {0}")]
    Inconsistency(String),

    /// The requested combination of model and operation is not provided.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Configuration could not be parsed or validated.
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, diagnostics: impl Into<String>) -> Self {
        Error::Numerical {
            message: message.into(),
            diagnostics: diagnostics.into(),
        }
    }

    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
