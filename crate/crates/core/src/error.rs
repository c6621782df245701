use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Inputs outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A non-finite value showed up during evaluation.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A caller-supplied object lacks something the operation needs.
    #[error("contract error: {0}")]
    Contract(String),
    /// A stated precondition that guarantees exactness does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Memory, index or search budget exhausted.
    #[error("resource limit: {0}")]
    Resource(String),
    /// The flow left its safety box.
    #[error("flow blow-up: {0}")]
    BlowUp(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
