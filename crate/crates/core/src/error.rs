use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("mismatched quadratic fields: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u64, u64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("value is not finite")]
    NonFinite,

    #[error("cannot parse number {0:?}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("kernel window for ell={ell} hit the cap j={j_cap}; captured mass {achieved:e}")]
    Truncation { ell: u64, j_cap: u64, achieved: f64 },

    #[error("layer recurrence for n={n} is not converging: {detail}")]
    Divergence { n: u64, detail: String },

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error("precision insufficient: {0}")]
    Precision(String),

    #[error("{what}: methods disagree by {diff:e} (allowed {allowed:e})")]
    Consistency {
        what: String,
        diff: f64,
        allowed: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
