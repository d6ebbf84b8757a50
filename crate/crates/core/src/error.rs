use thiserror::Error;

/// Errors surfaced by the library and the CLI runners.
#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("profile has {actual} entries but the network has {expected} caches")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),

    #[error("invalid intensity vector: {0}")]
    InvalidIntensities(String),

    #[error(
        "enumerating {profiles} profiles exceeds the budget of {budget}; \
         raise the budget or fall back to the analytical bounds / sampling estimator"
    )]
    EnumerationBudget { profiles: u128, budget: u64 },

    #[error("{associations:.3e} associations exceed the brute-force limit of {limit:.3e}")]
    InstanceTooLarge { associations: f64, limit: f64 },

    #[error("lower bounds require at least 2 caches (got {0})")]
    CacheCountTooSmall(u32),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("failed writing {path}: {source}")]
    OutputIo {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
