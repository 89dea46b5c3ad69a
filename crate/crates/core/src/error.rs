use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chain needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("maximum coupling must be positive and finite, got {0}")]
    InvalidCoupling(f64),

    #[error("disorder strength must be non-negative and finite, got {0}")]
    InvalidStrength(f64),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("site {site} outside chain of {n_sites} sites")]
    InvalidSite { site: usize, n_sites: usize },

    #[error("realization index {index} out of range for ensemble of {n_realizations}")]
    RealizationIndex { index: usize, n_realizations: usize },

    #[error("ensemble needs at least one realization")]
    EmptyEnsemble,

    #[error("eigensolver failed to converge for eigenvalue {index}")]
    NoConvergence { index: usize },

    #[error("operation requires the PST coupling law")]
    RequiresPst,

    #[error("invalid schedule: {0}")]
    Schedule(String),

    #[error("invalid fit range [{lo}, {hi}]")]
    FitRange { lo: usize, hi: usize },

    #[error("non-positive probability {value} at site {site} inside fit range")]
    NonPositiveProbability { site: usize, value: f64 },

    #[error("threshold must lie strictly between 0 and 1, got {0}")]
    Threshold(f64),

    #[error("realization {index}: {source}")]
    Realization {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("worker pool: {0}")]
    WorkerPool(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
