use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} violates constraint {constraint}")]
    ParamOutOfRange {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("argument {alpha} lies outside the admissible interval ({lower}, {upper})")]
    DomainViolation { alpha: f64, lower: f64, upper: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("quadrature did not reach tolerance: estimate {estimate}, error bound {error}")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("foreign interest rate `f` is required for FX valuation")]
    MissingForeignRate,

    #[error("dividend inputs `{0}` missing")]
    MissingDividendInput(&'static str),

    #[error("dividend yield r + R - gamma = {delta} is not positive")]
    NonpositiveDividendYield { delta: f64 },

    #[error("operation requires the {expected} family, got {found}")]
    WrongFamily {
        expected: &'static str,
        found: String,
    },

    #[error("schedule breakpoint {time} is not on the simulation grid")]
    GridMismatch { time: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
