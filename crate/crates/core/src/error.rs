use thiserror::Error;

/// Errors produced by the measure, spectrum, density and completeness routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("unsupported system: {0} is only available for R=[[2,1],[0,2]], B={{(0,0),(1,0)}}")]
    UnsupportedSystem(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("out of representable range: {0}")]
    Range(String),

    #[error("malformed spectrum: {0}")]
    MalformedSpectrum(String),

    #[error("excluded point: xi1 = {xi1} lies within {radius:e} of an integer")]
    ExcludedPoint { xi1: f64, radius: f64 },

    #[error("oracle incomplete: {0}")]
    OracleIncomplete(String),

    #[error("degenerate counting profile: {0}")]
    DegenerateProfile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
