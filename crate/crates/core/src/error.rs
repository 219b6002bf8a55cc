use thiserror::Error;

/// Errors raised by the core solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SlpError {
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("gamma function pole at numerator argument {0}")]
    GammaPole(f64),
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: &'static str },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(alloc::string::String),
    #[error("Legendre coefficients of `{0}` did not decay within the node cap")]
    NoDecay(alloc::string::String),
    #[error("expression is not finite at x = {0}")]
    NonFinite(f64),
    #[error("operator truncation {size} too small for {needed} entries")]
    SizeTooSmall { size: usize, needed: usize },
    #[error("unsupported problem: {0}")]
    Unsupported(alloc::string::String),
    #[error("assembly failed: {0}")]
    Assembly(alloc::string::String),
    #[error("eigensolver failed: {0}")]
    Eigensolve(alloc::string::String),
    #[error("requested {requested} eigenpairs from a system of dimension {dim}")]
    TooManyEigenpairs { requested: usize, dim: usize },
}
