use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("variable {0} has an infinite bound")]
    InfiniteBound(String),
    #[error("variable {0} has empty domain [{1}, {2}]")]
    EmptyDomain(String, f64, f64),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("unknown variable index {0} referenced by {1}")]
    UnknownVariable(usize, String),
}
