//! Shared numerical kernels: adaptive quadrature and seeded sampling.

mod quadrature;
mod random;

pub use quadrature::{integrate, integrate_with_error, Estimate, QuadratureSpec};
pub use random::{
    sample_nakagami, sample_poisson, sample_truncated_exponential, RandomSource,
};
pub(crate) use random::{truncated_exponential_quantile, FadingPower, PoissonCount};
