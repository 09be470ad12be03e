use thiserror::Error;

/// Errors produced by the solvency model.
#[derive(Debug, Error)]
pub enum Error {
    /// Parameters or inputs outside the domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// The interest rate is at or above the viability bound, so no firm can
    /// operate without a loss.
    #[error("market not viable: interest rate {rate} >= r_max {r_max}")]
    NotViable { rate: f64, r_max: f64 },

    /// A capital configuration outside the two-firm taxonomy.
    #[error("classification error: {0}")]
    Classification(String),

    /// A numerical routine failed (no bracket, singular system, non-finite value).
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
