use thiserror::Error;

/// Errors raised by the exposure engine.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (negative time, S > E, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Market data is missing or malformed (historical fixing, FX spot, curve file).
    #[error("market data error: {0}")]
    Data(String),

    /// A leg cannot be tiled into whole periods.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// A computation is numerically undefined (zero annuity, non-finite value).
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The product is outside the linear scope handled by the engine.
    #[error("unsupported product: {0}")]
    Unsupported(String),

    /// Model or supervisory configuration is invalid.
    #[error("configuration error: {0}")]
    Config(String),

    /// A portfolio or report document violates its schema.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
