use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// Every variant carries enough context to be surfaced verbatim by the CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("operator references site `{0}` which is not in the tensor order")]
    UnknownSite(String),

    #[error("dense dimension 2^{sites} exceeds the cap of 2^{cap}")]
    DimensionCap { sites: usize, cap: usize },

    #[error("operator still carries formal symbol on site `{0}`; substitute a value first")]
    FormalSymbol(String),

    #[error("term `{term}` is not off-diagonal on mediator `{mediator}`")]
    NotOffDiagonal { mediator: String, term: String },

    #[error("perturbation norm {norm:.6e} on mediator `{mediator}` is not below delta/2 = {half_gap:.6e}")]
    TooStrong {
        mediator: String,
        norm: f64,
        half_gap: f64,
    },

    #[error("term `{term}` carries sigma^y on mediator `{mediator}`")]
    YTermPresent { mediator: String, term: String },

    #[error("residual terms outside the effective basis exceed {tolerance:.3e}: {terms}")]
    BasisLeak { tolerance: f64, terms: String },

    #[error("sector {sector} is degenerate: gap {gap:.3e} to the first excited level")]
    Degenerate { sector: String, gap: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("gapless divergence: {0}")]
    GaplessDivergence(String),

    #[error("resource cap: {0}")]
    ResourceCap(String),

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
