//! Error type shared by the whole crate.

use thiserror::Error;

/// Errors produced by the solver pipeline.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A sampled function that must stay bounded away from zero vanishes
    /// (or nearly vanishes) at some mesh point.
    #[error("ZeroOnMesh: {what} vanishes at x = {x}")]
    ZeroOnMesh { what: String, x: f64 },

    /// Two sampled functions that must share a mesh were defined on
    /// different meshes.
    #[error("GridMismatch: {0}")]
    GridMismatch(String),

    /// The automatically built seed solution loses its modulus somewhere on
    /// the interval, so dividing by it is not safe.
    #[error(
        "SeedVanishes: min |u0| = {min_abs:.3e} against sup |u0| = {sup_abs:.3e}; \
         the seed has an (approximate) zero on the interval"
    )]
    SeedVanishes { min_abs: f64, sup_abs: f64 },

    /// The truncated series used to build the seed has not converged: the
    /// last appended term is still large at the right endpoint.
    #[error(
        "NonconvergedSeed: order-{order} seed term still contributes {tail:.3e} \
         at the right endpoint (tolerance {tol:.3e}); raise the seed order or the mesh size"
    )]
    NonconvergedSeed { order: usize, tail: f64, tol: f64 },

    /// An integral table entry overflowed the safety threshold, usually
    /// because 1/(p·u0²) is huge somewhere.
    #[error("DivisionBlowup: table entry at degree {degree} reached sup {sup:.3e}")]
    DivisionBlowup { degree: usize, sup: f64 },

    /// Two series (or tables) that must share order, dimension and mode do
    /// not.
    #[error("OrderMismatch: {0}")]
    OrderMismatch(String),

    /// Boundary-value operations require the series base point to be the
    /// left endpoint of the interval.
    #[error("BasepointNotLeft: series base point x0 = {x0} but interval starts at x1 = {x1}")]
    BasepointNotLeft { x0: f64, x1: f64 },

    /// Root finding was asked for on a polynomial whose coefficients are all
    /// (numerically) zero.
    #[error("DegenerateZeroPolynomial: all polynomial coefficients are numerically zero")]
    DegenerateZeroPolynomial,

    /// A multi-index or table entry outside the stored range was requested.
    #[error("IndexOutOfRange: {0}")]
    IndexOutOfRange(String),

    /// Reflectance/transmittance was requested outside the propagating
    /// regime (one of the transverse wavenumbers squared is not positive).
    #[error(
        "EvanescentRegime: beta*b = {beta_b}, b/lambda = {b_over_lambda}: \
         a transverse wavenumber squared is not positive"
    )]
    EvanescentRegime { beta_b: f64, b_over_lambda: f64 },

    /// A scalar nonlinear solve found no sign change, so there is no root to
    /// bracket.
    #[error("NoSignChange: no root of the dispersion relation for s = {s}")]
    NoSignChange { s: f64 },

    /// The expression parser rejected its input.
    #[error("SyntaxError at byte {offset}: expected {expected}")]
    SyntaxError { offset: usize, expected: String },

    /// An expression failed to evaluate at a mesh point.
    #[error("EvalError at x = {x}: {cause}")]
    EvalError { x: f64, cause: String },

    /// A CSV table could not be parsed.
    #[error("CsvFormat: line {line}: {message}")]
    CsvFormat { line: usize, message: String },

    /// A problem description is inconsistent (bad dimension, bad interval…).
    #[error("InvalidProblem: {0}")]
    InvalidProblem(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ZeroOnMesh { .. } => "ZeroOnMesh",
            Error::GridMismatch(_) => "GridMismatch",
            Error::SeedVanishes { .. } => "SeedVanishes",
            Error::NonconvergedSeed { .. } => "NonconvergedSeed",
            Error::DivisionBlowup { .. } => "DivisionBlowup",
            Error::OrderMismatch(_) => "OrderMismatch",
            Error::BasepointNotLeft { .. } => "BasepointNotLeft",
            Error::DegenerateZeroPolynomial => "DegenerateZeroPolynomial",
            Error::IndexOutOfRange(_) => "IndexOutOfRange",
            Error::EvanescentRegime { .. } => "EvanescentRegime",
            Error::NoSignChange { .. } => "NoSignChange",
            Error::SyntaxError { .. } => "SyntaxError",
            Error::EvalError { .. } => "EvalError",
            Error::CsvFormat { .. } => "CsvFormat",
            Error::InvalidProblem(_) => "InvalidProblem",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinds_are_stable() {
        let e = Error::SeedVanishes {
            min_abs: 1e-15,
            sup_abs: 1.0,
        };
        assert_eq!(e.kind(), "SeedVanishes");
        assert!(e.to_string().contains("SeedVanishes"));
        let e = Error::SyntaxError {
            offset: 5,
            expected: "a primary expression".into(),
        };
        assert_eq!(e.kind(), "SyntaxError");
        assert!(e.to_string().contains("byte 5"));
    }
}
