use thiserror::Error;

/// Errors raised by the DRBO library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DrboError {
    /// Inconsistent shapes, empty inputs or invalid settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Factorization failure or non-finite intermediate values.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A failure inside an experiment loop, tagged with the iteration it happened at.
    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<DrboError>,
    },
}

impl DrboError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        DrboError::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        DrboError::Domain(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        DrboError::Numerical(msg.into())
    }

    /// True when the error (or the one it wraps) is numerical.
    pub fn is_numerical(&self) -> bool {
        match self {
            DrboError::Numerical(_) => true,
            DrboError::AtIteration { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, DrboError>;
