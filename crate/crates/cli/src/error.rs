use std::fmt;

use slp_core::SlpError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(SlpError),
    /// One or more validation checks failed; the report was still written.
    Validation(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 5,
            CliError::Core(e) => match e {
                SlpError::InvalidArgument(_)
                | SlpError::Syntax { .. }
                | SlpError::UnknownIdentifier(_)
                | SlpError::TooManyEigenpairs { .. }
                | SlpError::SizeTooSmall { .. } => 1,
                SlpError::Unsupported(_) => 2,
                SlpError::GammaPole(_) | SlpError::NoDecay(_) | SlpError::NonFinite(_) | SlpError::Assembly(_) => 3,
                SlpError::Eigensolve(_) => 4,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Validation(n) => write!(f, "{n} validation check(s) failed"),
        }
    }
}

impl From<SlpError> for CliError {
    fn from(e: SlpError) -> Self {
        CliError::Core(e)
    }
}
