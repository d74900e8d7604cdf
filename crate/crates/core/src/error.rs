use thiserror::Error;

/// Errors produced by grids, solvers, transport and studies.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("integration error: {0}")]
    Integration(String),

    #[error("stability error: outgoing flux factor {factor} > 1 in cell {cell}")]
    Stability { cell: usize, factor: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unbalanced marginals: masses {0} and {1}")]
    UnbalancedMarginals(f64, f64),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("transport problem too large ({0} cost entries); use the entropic solver")]
    SizeOverflow(usize),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("under-resolved: {0}")]
    UnderResolved(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
