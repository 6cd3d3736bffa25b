use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("eigensolver did not converge (best residual {best_residual:e})")]
    NonConvergence { best_residual: f64 },
    #[error("instance has {n} vertices, above the cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("diagnostic: {0}")]
    Diagnostic(String),
    #[error("cycle assembly failed: {0}")]
    Assembly(String),
}

impl Error {
    /// Short machine-readable tag used in JSON diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Contract(_) => "contract",
            Error::NonConvergence { .. } => "non_convergence",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::Infeasible(_) => "infeasible",
            Error::Diagnostic(_) => "diagnostic",
            Error::Assembly(_) => "assembly",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}
