use thiserror::Error;

/// Errors raised by the pricing, solver and sampling routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("kernel evaluated outside its domain at t = {t}")]
    Domain { t: f64 },

    #[error("fractional kernel with H = {h} is not locally integrable (need H > -1/2)")]
    NonIntegrableKernel { h: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric failure at step {step}: {reason}")]
    NumericFailure { step: usize, reason: String },

    #[error("singular argument in logarithm at t = {t}")]
    SingularArgument { t: f64 },

    #[error("correlation rho = {rho} is not supported by the limit parametrization (need |rho| < 1)")]
    UnsupportedCorrelation { rho: f64 },

    #[error("characteristic function is not finite at frequency u = {u}")]
    NonFiniteCf { u: f64 },

    #[error("no implied volatility: price {price} outside ({lower}, {upper})")]
    NoImpliedVol { price: f64, lower: f64, upper: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("surface cell (T = {maturity}, k = {log_moneyness}) is missing")]
    MissingCell { maturity: f64, log_moneyness: f64 },

    #[error("empty sample set")]
    EmptySamples,

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
