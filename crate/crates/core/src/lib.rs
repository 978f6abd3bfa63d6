//! Downlink coverage analysis for LEO satellite networks whose satellites
//! form one-dimensional Poisson point processes on inclined circular orbits.
//!
//! The analytic engine ([`geometry`], [`distance`], [`interference`],
//! [`coverage`]) evaluates visibility, nearest-satellite distance laws,
//! interference Laplace transforms and SIR/SNR coverage probabilities. The
//! [`montecarlo`] module simulates the same constellations in 3-D and is used
//! to validate every analytic expression.
//!
//! Units: kilometres for geometry, satellites per kilometre of orbit for
//! densities, radians for angles. Absolute SNR quantities use metres.

pub mod coverage;
pub mod distance;
pub mod error;
pub mod geometry;
pub mod interference;
pub mod montecarlo;
pub mod numerics;

pub use coverage::{
    max_sir_coverage, max_sir_coverage_conditional, sir_coverage, sir_coverage_conditional,
    snr_coverage, snr_coverage_conditional, ConstellationSpec, CoverageCurve, CurveKind,
    CurveMetadata, LinkBudget,
};
pub use distance::NearestDistanceLaw;
pub use error::{Error, Result};
pub use geometry::{
    eta, orbital_speed, visibility_probability, visible_arc_length, visible_time,
    EarthConstants, OrbitGeometry, VisibilityWindow,
};
pub use interference::{
    effective_gains, laplace_derivatives, log_laplace, AntennaModel, ChannelParams,
};
pub use montecarlo::{McConfig, SatelliteSnapshot};
pub use numerics::{integrate, QuadratureSpec, RandomSource};

/// Decibels to linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to decibels.
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}
