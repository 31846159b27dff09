use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} is not an ancestor of the element's field")]
    NotAncestor(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("outside convergence domain: {0}")]
    OutsideDomain(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} does not divide {1}")]
    NotADivisor(u64, u64),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("character outside the spectrum: {0}")]
    NotInSpectrum(String),
    #[error("subtorus is not admissible")]
    NotAdmissible,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
