use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero: |denominator| = {0:e} is below the division floor")]
    DivisionByZero(f64),

    #[error("exp overflow: argument {0} is not representable")]
    ExpOverflow(f64),

    #[error("invalid dilation factor A = {0}: need |A| > 1")]
    InvalidDilation(f64),

    #[error("invalid translation step B = {0}: need B > 0")]
    InvalidTranslation(f64),

    #[error("domain error in {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("quadrature did not converge on [{a}, {b}] within depth {depth}")]
    NonConvergence { a: f64, b: f64, depth: usize },

    #[error("lattice sum not negligible by |l| = {0} and no decay envelope available")]
    MissingEnvelope(i64),

    #[error("unsupported integrand: {0}")]
    Unsupported(String),

    #[error("grid refinement stalled: last change {change:e} above tolerance {tol:e}")]
    GridStall { change: f64, tol: f64 },

    #[error("kernel truncation remainder {remainder:e} exceeds tolerance {tol:e}")]
    Truncation { remainder: f64, tol: f64 },

    #[error("kernel evaluated on the diagonal x = y = {0}")]
    Diagonal(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain { what, detail: detail.into() }
}
