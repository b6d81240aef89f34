use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must share a party count or length do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A requested size exceeds a configured cap.
    #[error("capacity exceeded: {what} needs {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: u64,
        limit: u64,
    },

    /// A numeric argument lies outside its valid range.
    #[error("domain error: {0}")]
    Domain(String),

    /// An index or parameter is not valid for the object it addresses.
    #[error("invalid argument: {0}")]
    Invalid(String),

    /// A simulation-side consistency check failed.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}
