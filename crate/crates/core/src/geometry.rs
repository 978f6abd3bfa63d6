//! Geometry of a circular orbit as seen from a fixed user on the Earth's surface.
//!
//! The user sits at `u = (0, 0, R_E)`. An orbit is the great circle of radius
//! `R = R_E + R_h` whose plane has unit normal
//! `(sin θ cos φ, sin θ sin φ, cos θ)`. A satellite is visible when its
//! elevation is at least `ω_min`, which is the same as lying in the spherical
//! cap `z > R_A` of the orbit sphere.
//!
//! Every orbit point is identified by its arc coordinate: the length of the
//! arc, centred on the orbit point closest to the user, made of all points
//! no farther from the user than a given distance. A homogeneous Poisson
//! process on the orbit is uniform in this coordinate, which is what the rest
//! of the crate integrates over.
//!
//! All lengths are kilometres. Angles are radians.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when clamping an `arccos` argument back into `[-1, 1]`.
pub const ETA_CLAMP_TOLERANCE: f64 = 1e-12;

/// Physical constants of the Earth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthConstants {
    /// Mean Earth radius (km).
    pub radius_km: f64,
    /// Universal gravitational constant (m³ kg⁻¹ s⁻²).
    pub gravitational_constant: f64,
    /// Mass of the Earth (kg).
    pub mass_kg: f64,
}

impl Default for EarthConstants {
    fn default() -> Self {
        Self {
            radius_km: 6371.0,
            gravitational_constant: 6.67259e-11,
            mass_kg: 5.9736e24,
        }
    }
}

impl EarthConstants {
    pub fn new(radius_km: f64, gravitational_constant: f64, mass_kg: f64) -> Result<Self> {
        if !(radius_km.is_finite() && radius_km > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "earth radius must be positive, got {radius_km}"
            )));
        }
        if !(gravitational_constant > 0.0 && mass_kg > 0.0) {
            return Err(Error::InvalidParameter(
                "gravitational constant and mass must be positive".into(),
            ));
        }
        Ok(Self {
            radius_km,
            gravitational_constant,
            mass_kg,
        })
    }

    /// Standard gravitational parameter `GM` in m³/s².
    pub fn gm(&self) -> f64 {
        self.gravitational_constant * self.mass_kg
    }
}

/// One circular orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitGeometry {
    earth_radius: f64,
    altitude: f64,
    radius: f64,
    theta: f64,
    phi: f64,
}

impl OrbitGeometry {
    /// Builds an orbit at `altitude_km` above a sphere of radius `earth_radius_km`.
    ///
    /// `theta` must lie in `[0, π]`; `phi` is reduced into `[0, 2π)`.
    pub fn new(earth_radius_km: f64, altitude_km: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(earth_radius_km.is_finite() && earth_radius_km > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "earth radius must be positive, got {earth_radius_km}"
            )));
        }
        if !(altitude_km.is_finite() && altitude_km > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "altitude must be positive, got {altitude_km}"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::range("theta", theta, 0.0, PI));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("phi must be finite, got {phi}")));
        }
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        Ok(Self {
            earth_radius: earth_radius_km,
            altitude: altitude_km,
            radius: earth_radius_km + altitude_km,
            theta,
            phi,
        })
    }

    pub fn earth_radius(&self) -> f64 {
        self.earth_radius
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    /// Orbit radius `R = R_E + R_h`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Polar angle of the orbit normal.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Azimuth angle of the orbit normal.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Unit normal of the orbit plane in Cartesian coordinates.
    pub fn normal(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Copy of this orbit with a different polar angle.
    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.earth_radius, self.altitude, theta, self.phi)
    }

    /// Minimum distance between the user and any point of the orbit.
    pub fn d_min(&self) -> f64 {
        // R² − 2 R_E R sin θ + R_E², rewritten around θ = π/2 so that the
        // overhead case returns R_h exactly.
        let half = 0.5 * (self.theta - FRAC_PI_2);
        let s = half.sin();
        (self.altitude * self.altitude + 4.0 * self.earth_radius * self.radius * s * s).sqrt()
    }

    /// Maximum distance between the user and any point of the orbit.
    pub fn d_far(&self) -> f64 {
        let r = self.radius;
        let re = self.earth_radius;
        (r * r + re * re + 2.0 * re * r * self.theta.sin()).sqrt()
    }

    /// Distance `r(ℓ)` such that the orbit points within `r` of the user form an
    /// arc of length `ℓ`. Accepts `ℓ ∈ [0, 2πR]`.
    pub fn arc_to_distance(&self, ell: f64) -> Result<f64> {
        let full = 2.0 * PI * self.radius;
        if !(0.0..=full).contains(&ell) {
            return Err(Error::range("arc length", ell, 0.0, full));
        }
        let dmin = self.d_min();
        let s = (ell / (4.0 * self.radius)).sin();
        let r2 = dmin * dmin + 4.0 * self.earth_radius * self.radius * self.theta.sin() * s * s;
        Ok(r2.sqrt())
    }

    /// Length of the orbit arc lying within distance `r` of the user; inverse of
    /// [`arc_to_distance`](Self::arc_to_distance).
    pub fn distance_to_arc(&self, r: f64) -> Result<f64> {
        let sin_theta = self.theta.sin();
        if sin_theta == 0.0 {
            return Err(Error::Domain(
                "every point of an equatorial orbit is equidistant from the user".into(),
            ));
        }
        let dmin = self.d_min();
        let dfar = self.d_far();
        if !(r >= dmin * (1.0 - 1e-14) && r <= dfar * (1.0 + 1e-14)) {
            return Err(Error::range("distance", r, dmin, dfar));
        }
        // ℓ = R arccos(η) = 4R asin(√((r² − d_min²) / (4 R_E R sin θ))),
        // which stays accurate when ℓ is small.
        let num = (r - dmin) * (r + dmin);
        let x = (num / (4.0 * self.earth_radius * self.radius * sin_theta)).clamp(0.0, 1.0);
        Ok(4.0 * self.radius * x.sqrt().asin())
    }
}

/// The visible spherical cap seen from the user for a given minimum elevation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityWindow {
    omega_min: f64,
    r_a: f64,
    d_max: f64,
    earth_radius: f64,
    altitude: f64,
}

impl VisibilityWindow {
    /// Cap for satellites at `altitude_km` and minimum elevation `omega_min`
    /// (radians, `[0, π/2)`).
    pub fn new(earth_radius_km: f64, altitude_km: f64, omega_min: f64) -> Result<Self> {
        if !(0.0..FRAC_PI_2).contains(&omega_min) {
            return Err(Error::range("omega_min", omega_min, 0.0, FRAC_PI_2));
        }
        if !(earth_radius_km > 0.0 && altitude_km > 0.0) {
            return Err(Error::InvalidParameter(
                "earth radius and altitude must be positive".into(),
            ));
        }
        let re_sin = earth_radius_km * omega_min.sin();
        let d_max = -re_sin
            + (re_sin * re_sin + 2.0 * earth_radius_km * altitude_km + altitude_km * altitude_km)
                .sqrt();
        let r_a = d_max * omega_min.sin() + earth_radius_km;
        Ok(Self {
            omega_min,
            r_a,
            d_max,
            earth_radius: earth_radius_km,
            altitude: altitude_km,
        })
    }

    /// Cap matching the shell of `orbit`.
    pub fn for_orbit(orbit: &OrbitGeometry, omega_min: f64) -> Result<Self> {
        Self::new(orbit.earth_radius(), orbit.altitude(), omega_min)
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    /// Distance from the Earth's centre to the base plane of the cap.
    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    /// Largest user-to-satellite distance inside the cap.
    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    pub fn earth_radius(&self) -> f64 {
        self.earth_radius
    }

    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    pub(crate) fn matches(&self, orbit: &OrbitGeometry) -> bool {
        (self.altitude - orbit.altitude()).abs() <= 1e-9 * orbit.radius()
            && (self.earth_radius - orbit.earth_radius()).abs() <= 1e-9 * orbit.radius()
    }

    pub(crate) fn check(&self, orbit: &OrbitGeometry) -> Result<()> {
        if self.matches(orbit) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "visibility window built for altitude {} km used with an orbit at {} km",
                self.altitude,
                orbit.altitude()
            )))
        }
    }
}

/// `η(R, θ, h) = 2h² / (R² sin² θ) − 1`, the cosine of the vertex angle of the
/// arc cut from the orbit by the plane `z = h`.
///
/// Values within [`ETA_CLAMP_TOLERANCE`] of ±1 are clamped onto the bound;
/// anything farther out is returned as is so that callers can tell the plane
/// misses the orbit.
pub fn eta(radius: f64, theta: f64, h: f64) -> Result<f64> {
    let s = theta.sin();
    if !(radius > 0.0) {
        return Err(Error::Domain(format!("orbit radius must be positive, got {radius}")));
    }
    if s == 0.0 || !s.is_finite() {
        return Err(Error::Domain(
            "sin θ = 0: the orbit plane is parallel to the cap base".into(),
        ));
    }
    let v = 2.0 * h * h / (radius * radius * s * s) - 1.0;
    Ok(clamp_unit(v))
}

pub(crate) fn clamp_unit(v: f64) -> f64 {
    if v > 1.0 && v <= 1.0 + ETA_CLAMP_TOLERANCE {
        1.0
    } else if v < -1.0 && v >= -1.0 - ETA_CLAMP_TOLERANCE {
        -1.0
    } else {
        v
    }
}

/// Whether the orbit crosses the visible cap at all.
pub fn crosses_cap(orbit: &OrbitGeometry, window: &VisibilityWindow) -> bool {
    let band = (window.r_a() / orbit.radius()).min(1.0).acos();
    (orbit.theta() - FRAC_PI_2).abs() <= band
}

/// Length of the part of `orbit` inside the visible cap (km).
pub fn visible_arc_length(orbit: &OrbitGeometry, window: &VisibilityWindow) -> f64 {
    if !crosses_cap(orbit, window) {
        return 0.0;
    }
    // R arccos(η(R, θ, R_A)), in half-angle form.
    let peak = orbit.radius() * orbit.theta().sin();
    if peak <= 0.0 {
        return 0.0;
    }
    let x = ((peak - window.r_a()) / (2.0 * peak)).clamp(0.0, 1.0);
    4.0 * orbit.radius() * x.sqrt().asin()
}

/// Probability that at least one satellite is visible when orbit `n` carries a
/// Poisson process of density `lambdas[n]` (satellites per km).
pub fn visibility_probability(
    lambdas: &[f64],
    orbits: &[OrbitGeometry],
    window: &VisibilityWindow,
) -> Result<f64> {
    if lambdas.len() != orbits.len() {
        return Err(Error::LengthMismatch {
            left: lambdas.len(),
            right: orbits.len(),
        });
    }
    let mut mean = 0.0;
    for (&lambda, orbit) in lambdas.iter().zip(orbits) {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "density must be a finite non-negative number, got {lambda}"
            )));
        }
        mean += lambda * visible_arc_length(orbit, window);
    }
    Ok(-(-mean).exp_m1())
}

/// Circular orbital speed `√(GM/R)` in m/s.
pub fn orbital_speed(orbit: &OrbitGeometry, earth: &EarthConstants) -> f64 {
    (earth.gm() / (orbit.radius() * 1e3)).sqrt()
}

/// Time a satellite spends inside the visible cap during one pass (s).
pub fn visible_time(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    earth: &EarthConstants,
) -> f64 {
    let arc_m = visible_arc_length(orbit, window) * 1e3;
    arc_m * (orbit.radius() * 1e3).sqrt() / earth.gm().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn remark_setup() -> (OrbitGeometry, VisibilityWindow) {
        let orbit = OrbitGeometry::new(6371.0, 500.0, FRAC_PI_2, 0.0).unwrap();
        let window = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians()).unwrap();
        (orbit, window)
    }

    #[test]
    fn eta_trivial_values() {
        let r = 6871.0;
        let theta: f64 = 1.2;
        assert!((eta(r, theta, r * theta.sin()).unwrap() - 1.0).abs() < 1e-15);
        assert!(eta(r, FRAC_PI_2, r / 2f64.sqrt()).unwrap().abs() < 1e-15);
        assert!(eta(r, 0.0, 100.0).is_err());
    }

    #[test]
    fn eta_reproduces_reference_arc() {
        let (orbit, window) = remark_setup();
        let v = eta(orbit.radius(), FRAC_PI_2, window.r_a()).unwrap();
        assert!((orbit.radius() * v.acos() - 3371.4).abs() < 0.1);
    }

    #[test]
    fn eta_only_clamps_within_tolerance() {
        let r = 1.0;
        // 2h² − 1 just above 1.
        let h = (1.0f64 + 0.5e-12).sqrt();
        assert_eq!(eta(r, FRAC_PI_2, h).unwrap(), 1.0);
        let h = (1.0f64 + 1e-6).sqrt();
        assert!(eta(r, FRAC_PI_2, h).unwrap() > 1.0);
    }

    #[test]
    fn reference_arc_length_and_time() {
        let (orbit, window) = remark_setup();
        let l = visible_arc_length(&orbit, &window);
        assert!((l - 3371.4).abs() < 0.1, "L = {l}");
        let earth = EarthConstants::default();
        assert!((visible_time(&orbit, &window, &earth) - 442.6396).abs() < 0.01);
        assert!((orbital_speed(&orbit, &earth) - 7616.5).abs() < 0.5);
    }

    #[test]
    fn equatorial_orbit_is_invisible() {
        let (orbit, window) = remark_setup();
        let flat = orbit.with_theta(0.0).unwrap();
        assert_eq!(visible_arc_length(&flat, &window), 0.0);
        assert_eq!(visible_time(&flat, &window, &EarthConstants::default()), 0.0);
        assert_eq!(
            visibility_probability(&[0.01], &[flat], &window).unwrap(),
            0.0
        );
    }

    #[test]
    fn band_edge_yields_zero_not_nan() {
        let (orbit, window) = remark_setup();
        let edge = FRAC_PI_2 + (window.r_a() / orbit.radius()).acos();
        let o = orbit.with_theta(edge).unwrap();
        let l = visible_arc_length(&o, &window);
        assert!(l.is_finite() && l < 1e-3, "L = {l}");
    }

    #[test]
    fn zero_elevation_matches_closed_form() {
        let orbit = OrbitGeometry::new(6371.0, 500.0, FRAC_PI_2, 0.0).unwrap();
        let window = VisibilityWindow::for_orbit(&orbit, 0.0).unwrap();
        assert_relative_eq!(window.r_a(), 6371.0, max_relative = 1e-14);
        let r = orbit.radius();
        let expected = r * (2.0 * 6371.0f64.powi(2) / (r * r) - 1.0).acos();
        assert_relative_eq!(visible_arc_length(&orbit, &window), expected, max_relative = 1e-12);
    }

    #[test]
    fn d_min_special_cases() {
        let (orbit, _) = remark_setup();
        assert_eq!(orbit.d_min(), 500.0);
        let flat = orbit.with_theta(0.0).unwrap();
        assert_relative_eq!(
            flat.d_min(),
            (6871.0f64.powi(2) + 6371.0f64.powi(2)).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn arc_distance_endpoints() {
        let (orbit, window) = remark_setup();
        let tilted = orbit.with_theta(FRAC_PI_2 + PI / 36.0).unwrap();
        for o in [orbit, tilted] {
            assert_relative_eq!(o.arc_to_distance(0.0).unwrap(), o.d_min(), max_relative = 1e-15);
            let l = visible_arc_length(&o, &window);
            assert_relative_eq!(o.arc_to_distance(l).unwrap(), window.d_max(), max_relative = 1e-9);
            assert!(o.distance_to_arc(o.d_min()).unwrap().abs() < 1e-9);
            assert_relative_eq!(o.distance_to_arc(window.d_max()).unwrap(), l, max_relative = 1e-9);
        }
        assert!(orbit.arc_to_distance(-1.0).is_err());
        assert!(orbit.arc_to_distance(2.0 * PI * orbit.radius() + 1.0).is_err());
        assert!(orbit.distance_to_arc(orbit.d_min() - 1.0).is_err());
        assert!(orbit.distance_to_arc(orbit.d_far() + 1.0).is_err());
    }

    #[test]
    fn distance_to_arc_matches_literal_formula() {
        let (orbit, window) = remark_setup();
        let o = orbit.with_theta(1.4).unwrap();
        let re = o.earth_radius();
        let r0 = o.radius();
        for i in 1..50 {
            let r = o.d_min() + (window.d_max() - o.d_min()) * i as f64 / 50.0;
            let h = (r0 * r0 + re * re - r * r) / (2.0 * re);
            let literal = r0 * eta(r0, o.theta(), h).unwrap().acos();
            assert_relative_eq!(o.distance_to_arc(r).unwrap(), literal, max_relative = 1e-9);
        }
    }

    #[test]
    fn arc_length_symmetric_and_peaks_overhead() {
        let (orbit, window) = remark_setup();
        let peak = visible_arc_length(&orbit, &window);
        for i in 0..=180 {
            let t = PI * i as f64 / 180.0;
            let a = visible_arc_length(&orbit.with_theta(t).unwrap(), &window);
            let b = visible_arc_length(&orbit.with_theta(PI - t).unwrap(), &window);
            assert!((a - b).abs() <= 1e-9 * peak);
            assert!(a <= peak + 1e-9);
        }
    }

    #[test]
    fn arc_length_shrinks_with_elevation() {
        let orbit = OrbitGeometry::new(6371.0, 500.0, 1.3, 0.0).unwrap();
        let lens: Vec<f64> = [10.0f64, 20.0, 30.0]
            .iter()
            .map(|w| {
                let window = VisibilityWindow::for_orbit(&orbit, w.to_radians()).unwrap();
                visible_arc_length(&orbit, &window)
            })
            .collect();
        assert!(lens[0] >= lens[1] && lens[1] >= lens[2]);
    }

    #[test]
    fn visibility_probability_errors_and_zero_density() {
        let (orbit, window) = remark_setup();
        assert!(matches!(
            visibility_probability(&[0.1, 0.2], &[orbit], &window),
            Err(Error::LengthMismatch { .. })
        ));
        assert_eq!(visibility_probability(&[0.0], &[orbit], &window).unwrap(), 0.0);
        let p = visibility_probability(&[0.001], &[orbit], &window).unwrap();
        assert_relative_eq!(p, 1.0 - (-3.3714f64).exp(), max_relative = 1e-4);
    }

    #[test]
    fn phi_is_normalised() {
        let o = OrbitGeometry::new(6371.0, 500.0, 1.0, -0.5).unwrap();
        assert!((0.0..2.0 * PI).contains(&o.phi()));
        assert!(OrbitGeometry::new(6371.0, 500.0, 4.0, 0.0).is_err());
        assert!(VisibilityWindow::new(6371.0, 500.0, FRAC_PI_2).is_err());
    }
}
