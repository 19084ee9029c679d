use thiserror::Error;

/// Errors raised by simulation, estimation and the Monte Carlo engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("path matrix of {requested} bytes exceeds the memory budget of {budget} bytes")]
    MemoryBudget { requested: u64, budget: u64 },

    #[error("empty sample set")]
    EmptySample,

    #[error("{what} must be positive, got {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("malformed path dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("configuration T={t}, N={n}, M={m}: {source}")]
    Configuration {
        t: f64,
        n: usize,
        m: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
