//! Law of the distance to the nearest visible satellite on one orbit, given
//! that at least one satellite is visible.
//!
//! In the arc coordinate `t` (see [`crate::geometry`]) the Poisson process is
//! uniform, so the nearest satellite's coordinate `T` is exponential with rate
//! `λ` truncated to the visible arc `[0, L]`. The distance is `D = r(T)`.

use crate::error::{Error, Result};
use crate::geometry::{visible_arc_length, OrbitGeometry, VisibilityWindow};
use crate::numerics::{
    integrate, sample_truncated_exponential, truncated_exponential_quantile, QuadratureSpec,
    RandomSource,
};

/// Conditional law of the nearest-satellite distance on one orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearestDistanceLaw {
    orbit: OrbitGeometry,
    window: VisibilityWindow,
    lambda: f64,
    arc_length: f64,
}

impl NearestDistanceLaw {
    /// Fails when the orbit never enters the visible cap or `lambda ≤ 0`.
    pub fn new(orbit: OrbitGeometry, window: VisibilityWindow, lambda: f64) -> Result<Self> {
        window.check(&orbit)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "satellite density must be positive, got {lambda}"
            )));
        }
        let arc_length = visible_arc_length(&orbit, &window);
        if !(arc_length > 0.0) {
            return Err(Error::InvisibleOrbit { index: 0 });
        }
        Ok(Self {
            orbit,
            window,
            lambda,
            arc_length,
        })
    }

    pub fn orbit(&self) -> &OrbitGeometry {
        &self.orbit
    }

    pub fn window(&self) -> &VisibilityWindow {
        &self.window
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Visible arc length `L` (km).
    pub fn arc_length(&self) -> f64 {
        self.arc_length
    }

    pub fn d_min(&self) -> f64 {
        self.orbit.d_min()
    }

    pub fn d_max(&self) -> f64 {
        self.window.d_max()
    }

    /// `P[at least one visible satellite] = 1 − e^{−λL}`.
    pub fn visibility(&self) -> f64 {
        -(-self.lambda * self.arc_length).exp_m1()
    }

    /// Distance of the orbit point at arc coordinate `t ∈ [0, L]`.
    pub fn distance_at(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.arc_length);
        self.orbit
            .arc_to_distance(t)
            .expect("arc coordinate inside the visible arc")
    }

    /// Arc coordinate of distance `r`, clamped to `[0, L]`.
    pub fn arc_at(&self, r: f64) -> f64 {
        if r <= self.d_min() {
            0.0
        } else if r >= self.d_max() {
            self.arc_length
        } else {
            self.orbit
                .distance_to_arc(r)
                .map(|t| t.min(self.arc_length))
                .unwrap_or(self.arc_length)
        }
    }

    /// CCDF of the arc coordinate of the nearest satellite.
    pub fn arc_ccdf(&self, t: f64) -> f64 {
        let l = self.arc_length;
        let t = t.clamp(0.0, l);
        // (e^{−λt} − e^{−λL}) / (1 − e^{−λL})
        (-self.lambda * t).exp() * (-self.lambda * (l - t)).exp_m1()
            / (-self.lambda * l).exp_m1()
    }

    /// Density of the arc coordinate of the nearest satellite on `[0, L]`.
    pub fn arc_density(&self, t: f64) -> f64 {
        if !(0.0..=self.arc_length).contains(&t) {
            return 0.0;
        }
        self.lambda * (-self.lambda * t).exp() / self.visibility()
    }

    /// `P[D > r | at least one visible]`; 1 below `d_min`, 0 above `d_max`.
    pub fn ccdf(&self, r: f64) -> f64 {
        if r <= self.d_min() {
            1.0
        } else if r >= self.d_max() {
            0.0
        } else {
            self.arc_ccdf(self.arc_at(r))
        }
    }

    pub fn cdf(&self, r: f64) -> f64 {
        1.0 - self.ccdf(r)
    }

    /// Density of `D` on the open interval `(d_min, d_max)`.
    pub fn pdf(&self, r: f64) -> Result<f64> {
        let (lo, hi) = (self.d_min(), self.d_max());
        if !(r > lo && r < hi) {
            return Err(Error::range("distance", r, lo, hi));
        }
        let t = self.arc_at(r);
        // dℓ/dr = 2r / (R_E sin θ sin(ℓ / 2R))
        let half = (t / (2.0 * self.orbit.radius())).sin();
        let dt_dr = 2.0 * r / (self.orbit.earth_radius() * self.orbit.theta().sin() * half);
        Ok(self.arc_density(t) * dt_dr)
    }

    /// Distance at probability level `u ∈ [0, 1)` (inverse CDF).
    pub fn quantile(&self, u: f64) -> f64 {
        let t = truncated_exponential_quantile(self.lambda, self.arc_length, u);
        self.distance_at(t)
    }

    /// Draws one nearest distance.
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        let t = sample_truncated_exponential(self.lambda, self.arc_length, rng);
        self.distance_at(t)
    }

    /// `E[g(T, D)]` over the nearest satellite, integrated in the arc coordinate.
    pub fn expectation<F>(&self, mut g: F, spec: &QuadratureSpec) -> Result<f64>
    where
        F: FnMut(f64, f64) -> Result<f64>,
    {
        let mut failure = None;
        let value = integrate(
            |t| {
                if failure.is_some() {
                    return 0.0;
                }
                match g(t, self.distance_at(t)) {
                    Ok(v) => v * self.arc_density(t),
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            },
            0.0,
            self.arc_length,
            spec,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        value
    }
}
