use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A bracketing root search was given an interval without a sign change.
    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo}, f(hi) = {f_hi}); expand the bracket")]
    NoSignChange {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    /// Adaptive quadrature ran out of panels before meeting its tolerance.
    #[error(
        "quadrature budget exhausted after {panels} panels (estimate {estimate}, error {error})"
    )]
    Quadrature {
        estimate: f64,
        error: f64,
        panels: usize,
    },

    /// A function evaluation returned NaN or an infinity where a finite value is required.
    #[error("non-finite evaluation at x = {0}")]
    NonFinite(f64),

    /// Observed information at a claimed maximum is not positive.
    #[error("observed information {0} is not positive; the estimate is not an interior maximum")]
    NonPositiveInformation(f64),

    /// A result is not representable as a finite double.
    #[error("overflow: {0}")]
    Overflow(String),

    /// Bad input data.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// Simulation output does not cover a full (theta, n) grid.
    #[error("incomplete grid, missing cells: {0}")]
    IncompleteGrid(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
