use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} = {value} outside [{low}, {high}]")]
    Range {
        what: &'static str,
        value: f64,
        low: f64,
        high: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} densities for {right} orbits")]
    LengthMismatch { left: usize, right: usize },

    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error bound {error_bound:e})"
    )]
    NonConvergence {
        estimate: f64,
        error_bound: f64,
        subdivisions: usize,
    },

    #[error("orbit {index} has no visible arc from the user")]
    InvisibleOrbit { index: usize },

    #[error("analytic path requires an integer Nakagami shape, got m = {0}")]
    NonIntegerShape(f64),

    #[error("derivative order {0} exceeds the supported maximum of 10")]
    DerivativeOrderTooHigh(usize),

    #[error("only {survivors} trials satisfied the conditioning event (need at least {required})")]
    Degenerate { survivors: u64, required: u64 },
}

impl Error {
    pub(crate) fn range(what: &'static str, value: f64, low: f64, high: f64) -> Self {
        Error::Range {
            what,
            value,
            low,
            high,
        }
    }
}
