use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the query.
    #[error("domain error: {0}")]
    Domain(String),
    /// The instance admits no feasible schedule.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// The solver's assumptions do not hold for this instance.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An enumeration or graph would exceed its size budget.
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
