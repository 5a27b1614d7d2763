use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no bracket found after {attempts} expansions while solving {what}")]
    BracketDiverged { what: &'static str, attempts: u32 },

    #[error("degenerate growth function: {0}")]
    Degenerate(String),

    #[error("growth function is in neither class U nor class L")]
    Unclassifiable,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sampling failure: {0}")]
    SamplingFailure(String),

    #[error(
        "integrand evaluated non-finite on {count} of {total} samples (first at {first:?})"
    )]
    IntegrandSingularity {
        count: usize,
        total: usize,
        first: Vec<[f64; 2]>,
    },

    #[error("estimated ball volume is not positive ({0}); raise the sample count")]
    VolumeUnderflow(f64),

    #[error("sequence elements live on different lattices")]
    LatticeMismatch,

    #[error("covering audit failed: {uncovered} of {probes} probes uncovered")]
    CoveringFailed { uncovered: usize, probes: usize },

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
