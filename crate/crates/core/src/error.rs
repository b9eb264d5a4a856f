use thiserror::Error;

/// Errors raised by the measure, map, dynamics and homogeneous layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("incompatible measures: {0}")]
    Incompatible(String),
    #[error("angle map cannot be evaluated: {0}")]
    MapDomain(String),
    #[error("character unsupported on this grid: {0}")]
    UnsupportedCharacter(String),
    #[error("angle map not eligible: {0}")]
    Ineligible(String),
    #[error("haar sampler gave up after {0} proposals")]
    SamplerFault(usize),
    #[error("reduction did not terminate: {0}")]
    ReductionFault(String),
    #[error("bad config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
