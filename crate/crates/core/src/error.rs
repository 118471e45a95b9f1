use thiserror::Error;

/// Errors surfaced by the library. Each variant maps onto a CLI exit code.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("precision exhausted after {solvable_prefix} of {requested} coefficients at {digits} digits")]
    PrecisionExhausted {
        solvable_prefix: usize,
        requested: usize,
        digits: u32,
    },

    #[error("singular coefficient conversion at position {0}")]
    SingularConversion(usize),

    #[error("infeasible QBER triple: {0}")]
    InfeasibleQber(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("no feasible layout: {0}")]
    Infeasible(String),

    #[error("sample budget of {budget} trials exceeded")]
    BudgetExceeded { budget: u64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Config(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
