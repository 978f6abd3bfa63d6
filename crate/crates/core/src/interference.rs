//! Laplace transform of the same-orbit interference seen by the user when the
//! serving satellite sits at distance `r`, and its derivatives in `s`.
//!
//! Interferers are the visible satellites farther than `r`, i.e. the Poisson
//! process on the arc coordinates `(ℓ(r), L]`. With Nakagami-m fading the
//! probability generating functional gives
//!
//! ```text
//! ln ℒ(s) = −λ ∫_{ℓ(r)}^{L} [1 − (1 + s Ḡ_I u(t)^{−α} / m)^{−m}] dt
//! ```
//!
//! where `u(t)` is the distance at arc coordinate `t`. Derivatives follow from
//! `ℒ = e^{−g}`: each `g⁽ᵏ⁾` has a closed-form integrand and the `ℒ⁽ᵗ⁾` are
//! assembled by the product rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{visible_arc_length, OrbitGeometry, VisibilityWindow};
use crate::numerics::{integrate, QuadratureSpec};

/// Highest derivative order [`laplace_derivatives`] will compute.
pub const MAX_DERIVATIVE_ORDER: usize = 10;

/// Propagation parameters shared by all links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Nakagami shape.
    pub m: f64,
    /// Interferer gain relative to the serving link (linear).
    pub g_i_bar: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            m: 1.0,
            g_i_bar: 10f64.powf(-1.3),
        }
    }
}

impl ChannelParams {
    pub fn new(alpha: f64, m: f64, g_i_bar: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "path-loss exponent must be positive, got {alpha}"
            )));
        }
        if !(m >= 0.5 && m.is_finite()) {
            return Err(Error::Domain(format!("Nakagami shape must be ≥ 0.5, got {m}")));
        }
        if !(g_i_bar > 0.0 && g_i_bar <= 1.0) {
            return Err(Error::range("relative interferer gain", g_i_bar, 0.0, 1.0));
        }
        Ok(Self { alpha, m, g_i_bar })
    }

    /// The Nakagami shape as an integer, as required by the analytic coverage
    /// expressions.
    pub fn integer_m(&self) -> Result<usize> {
        if self.m.fract() == 0.0 && self.m >= 1.0 {
            Ok(self.m as usize)
        } else {
            Err(Error::NonIntegerShape(self.m))
        }
    }
}

/// Two-lobe antenna model: the serving link uses the receive main lobe,
/// interferers the receive side lobe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaModel {
    pub g_t: f64,
    pub g_r: f64,
    pub g_r_sidelobe: f64,
    pub frequency_hz: f64,
    pub speed_of_light: f64,
}

impl AntennaModel {
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

    pub fn new(g_t: f64, g_r: f64, g_r_sidelobe: f64, frequency_hz: f64) -> Result<Self> {
        if !(g_t > 0.0 && g_r > 0.0 && g_r_sidelobe > 0.0 && frequency_hz > 0.0) {
            return Err(Error::InvalidParameter(
                "antenna gains and carrier frequency must be positive".into(),
            ));
        }
        if g_r_sidelobe > g_r {
            return Err(Error::InvalidParameter(format!(
                "side-lobe gain {g_r_sidelobe} exceeds main-lobe gain {g_r}"
            )));
        }
        Ok(Self {
            g_t,
            g_r,
            g_r_sidelobe,
            frequency_hz,
            speed_of_light: Self::SPEED_OF_LIGHT,
        })
    }
}

/// Serving and interfering effective gains and their ratio `Ḡ_I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveGains {
    pub serve: f64,
    pub interfere: f64,
    pub ratio: f64,
}

/// `G = G_t G_r c² / (4π f²)` for the main and side lobes.
pub fn effective_gains(ant: &AntennaModel) -> EffectiveGains {
    let spread = ant.speed_of_light.powi(2) / (4.0 * std::f64::consts::PI * ant.frequency_hz.powi(2));
    let serve = ant.g_t * ant.g_r * spread;
    let interfere = ant.g_t * ant.g_r_sidelobe * spread;
    EffectiveGains {
        serve,
        interfere,
        ratio: ant.g_r_sidelobe / ant.g_r,
    }
}

/// Interference on the visible arc of one orbit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ArcInterference {
    orbit: OrbitGeometry,
    lambda: f64,
    channel: ChannelParams,
    arc_length: f64,
    d_min: f64,
    d_max: f64,
    quad: QuadratureSpec,
}

impl ArcInterference {
    pub(crate) fn new(
        orbit: &OrbitGeometry,
        window: &VisibilityWindow,
        lambda: f64,
        channel: &ChannelParams,
        quad: QuadratureSpec,
    ) -> Result<Self> {
        window.check(orbit)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "satellite density must be non-negative, got {lambda}"
            )));
        }
        Ok(Self {
            orbit: *orbit,
            lambda,
            channel: *channel,
            arc_length: visible_arc_length(orbit, window),
            d_min: orbit.d_min(),
            d_max: window.d_max(),
            quad,
        })
    }

    fn check_distance(&self, r: f64) -> Result<()> {
        if self.arc_length == 0.0 {
            return Err(Error::InvisibleOrbit { index: 0 });
        }
        let tol = 1e-12 * self.d_max;
        if !(r >= self.d_min - tol && r <= self.d_max + tol) {
            return Err(Error::range("serving distance", r, self.d_min, self.d_max));
        }
        Ok(())
    }

    pub(crate) fn arc_of(&self, r: f64) -> f64 {
        if r <= self.d_min {
            0.0
        } else if r >= self.d_max {
            self.arc_length
        } else {
            self.orbit
                .distance_to_arc(r)
                .map(|t| t.min(self.arc_length))
                .unwrap_or(self.arc_length)
        }
    }

    fn distance(&self, t: f64) -> f64 {
        self.orbit
            .arc_to_distance(t.clamp(0.0, self.arc_length))
            .expect("arc coordinate inside the visible arc")
    }

    /// Per-unit-length interferer weight `a(t) = Ḡ_I u(t)^{−α} / m`.
    fn weight(&self, t: f64) -> f64 {
        self.channel.g_i_bar * self.distance(t).powf(-self.channel.alpha) / self.channel.m
    }

    /// `ln ℒ(s)` for interferers beyond arc coordinate `t0`.
    pub(crate) fn log_laplace_from(&self, t0: f64, s: f64) -> Result<f64> {
        if s == 0.0 || t0 >= self.arc_length {
            return Ok(0.0);
        }
        let m = self.channel.m;
        let integral = integrate(
            |t| {
                let x = s * self.weight(t);
                // 1 − (1 + x)^{−m}
                -(-m * x.ln_1p()).exp_m1()
            },
            t0,
            self.arc_length,
            &self.quad,
        )?;
        Ok(-self.lambda * integral)
    }

    /// `cᵏ g⁽ᵏ⁾(s)` for `k = 1..=k_max`, where `g = −ln ℒ`. Index 0 is unused.
    ///
    /// `dᵏ/dsᵏ (1 + as)^{−m} = (−a)ᵏ m(m+1)⋯(m+k−1) (1 + as)^{−m−k}`.
    fn scaled_log_derivatives(&self, t0: f64, s: f64, c: f64, k_max: usize) -> Result<Vec<f64>> {
        let mut out = vec![0.0; k_max + 1];
        if t0 >= self.arc_length {
            return Ok(out);
        }
        let m = self.channel.m;
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let rising: f64 = (0..k).map(|i| m + i as f64).product();
            let integral = integrate(
                |t| {
                    let a = self.weight(t);
                    let y = -c * a;
                    y.powi(k as i32) * (1.0 + a * s).powf(-m - k as f64)
                },
                t0,
                self.arc_length,
                &self.quad,
            )?;
            *slot = -self.lambda * rising * integral;
        }
        Ok(out)
    }

    /// `Aₜ = cᵗ ℒ⁽ᵗ⁾(s) / t!` for `t = 0..=t_max`, by the product-rule recursion
    /// `ℒ⁽ᵗ⁾ = −Σ_{j<t} C(t−1, j) g⁽ᵗ⁻ʲ⁾ ℒ⁽ʲ⁾`.
    pub(crate) fn scaled_derivatives_from(
        &self,
        t0: f64,
        s: f64,
        c: f64,
        t_max: usize,
    ) -> Result<Vec<f64>> {
        let mut terms = vec![0.0; t_max + 1];
        terms[0] = self.log_laplace_from(t0, s)?.exp();
        if t_max == 0 {
            return Ok(terms);
        }
        let b = self.scaled_log_derivatives(t0, s, c, t_max)?;
        let mut inv_fact = vec![1.0; t_max + 1];
        for i in 1..=t_max {
            inv_fact[i] = inv_fact[i - 1] / i as f64;
        }
        for t in 1..=t_max {
            let acc: f64 = (0..t).map(|j| b[t - j] * terms[j] * inv_fact[t - 1 - j]).sum();
            terms[t] = -acc / t as f64;
        }
        Ok(terms)
    }

    /// `Σ_{t<m} (−s)ᵗ ℒ⁽ᵗ⁾(s) / t!`, the probability that the serving link at
    /// arc coordinate `t0` beats `s · I / m` with Gamma(m, 1/m) fading power.
    pub(crate) fn coverage_series_from(&self, t0: f64, s: f64, m: usize) -> Result<f64> {
        let terms = self.scaled_derivatives_from(t0, s, -s, m - 1)?;
        Ok(terms.iter().sum())
    }

    pub(crate) fn log_laplace_at(&self, r: f64, s: f64) -> Result<f64> {
        self.check_distance(r)?;
        self.log_laplace_from(self.arc_of(r), s)
    }

    pub(crate) fn derivatives_at(&self, r: f64, s: f64, t_max: usize) -> Result<Vec<f64>> {
        self.check_distance(r)?;
        let t0 = self.arc_of(r);
        // Scale by the strongest interferer weight so the integrands stay O(1).
        let a_ref = self.weight(t0);
        let c = 1.0 / a_ref;
        let scaled = self.scaled_derivatives_from(t0, s, c, t_max)?;
        let mut fact = 1.0;
        Ok(scaled
            .iter()
            .enumerate()
            .map(|(t, v)| {
                if t > 0 {
                    fact *= t as f64;
                }
                v * fact * a_ref.powi(t as i32)
            })
            .collect())
    }
}

fn check_s(s: f64) -> Result<()> {
    if s >= 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Laplace variable must be finite and non-negative, got {s}"
        )))
    }
}

/// `ln ℒ_{I | D = r}(s)` for the interference on one orbit.
///
/// `r` must lie in `[d_min, d_max]`; the result is in `(−∞, 0]`.
pub fn log_laplace(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    r: f64,
    s: f64,
) -> Result<f64> {
    log_laplace_with(orbit, window, lambda, ch, r, s, &QuadratureSpec::default())
}

/// [`log_laplace`] with explicit quadrature tolerances.
pub fn log_laplace_with(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    r: f64,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    check_s(s)?;
    ArcInterference::new(orbit, window, lambda, ch, *quad)?.log_laplace_at(r, s)
}

/// `[ℒ(s), ℒ′(s), …, ℒ^{(t_max)}(s)]` for the interference on one orbit.
pub fn laplace_derivatives(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    r: f64,
    s: f64,
    t_max: usize,
) -> Result<Vec<f64>> {
    laplace_derivatives_with(orbit, window, lambda, ch, r, s, t_max, &QuadratureSpec::default())
}

/// [`laplace_derivatives`] with explicit quadrature tolerances.
#[allow(clippy::too_many_arguments)]
pub fn laplace_derivatives_with(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    r: f64,
    s: f64,
    t_max: usize,
    quad: &QuadratureSpec,
) -> Result<Vec<f64>> {
    if t_max > MAX_DERIVATIVE_ORDER {
        return Err(Error::DerivativeOrderTooHigh(t_max));
    }
    check_s(s)?;
    ArcInterference::new(orbit, window, lambda, ch, *quad)?.derivatives_at(r, s, t_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn setup() -> (OrbitGeometry, VisibilityWindow) {
        let orbit = OrbitGeometry::new(6371.0, 500.0, FRAC_PI_2, 0.0).unwrap();
        let window = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians()).unwrap();
        (orbit, window)
    }

    #[test]
    fn channel_defaults_and_validation() {
        let ch = ChannelParams::default();
        assert!((ch.g_i_bar - 0.050_118_723).abs() < 1e-8);
        assert_eq!(ch.integer_m().unwrap(), 1);
        assert!(ChannelParams::new(2.0, 0.4, 0.05).is_err());
        assert!(ChannelParams::new(2.0, 1.0, 1.5).is_err());
        assert!(matches!(
            ChannelParams::new(2.0, 0.7, 0.05).unwrap().integer_m(),
            Err(Error::NonIntegerShape(_))
        ));
    }

    #[test]
    fn effective_gain_ratio() {
        let ant = AntennaModel::new(100.0, 10f64.powf(1.3), 1.0, 2e10).unwrap();
        let g = effective_gains(&ant);
        assert!((g.ratio - 10f64.powf(-1.3)).abs() < 1e-15);
        assert!((g.interfere / g.serve - g.ratio).abs() < 1e-15);
        let iso = AntennaModel::new(100.0, 5.0, 5.0, 2e10).unwrap();
        assert_eq!(effective_gains(&iso).ratio, 1.0);
        let doubled = AntennaModel::new(100.0, 10f64.powf(1.3), 1.0, 4e10).unwrap();
        let g2 = effective_gains(&doubled);
        assert!((g2.serve / g.serve - 0.25).abs() < 1e-14);
        assert!((g2.interfere / g.interfere - 0.25).abs() < 1e-14);
        assert_eq!(g2.ratio, g.ratio);
        assert!(AntennaModel::new(1.0, 1.0, 2.0, 1e9).is_err());
    }

    #[test]
    fn trivial_laplace_values() {
        let (orbit, window) = setup();
        let ch = ChannelParams::default();
        assert_eq!(log_laplace(&orbit, &window, 0.005, &ch, 500.0, 0.0).unwrap(), 0.0);
        assert_eq!(
            log_laplace(&orbit, &window, 0.005, &ch, window.d_max(), 1e9).unwrap(),
            0.0
        );
        assert!(log_laplace(&orbit, &window, 0.005, &ch, 400.0, 1.0).is_err());
        assert!(log_laplace(&orbit, &window, 0.005, &ch, 500.0, -1.0).is_err());
    }

    #[test]
    fn zeroth_derivative_is_laplace() {
        let (orbit, window) = setup();
        let ch = ChannelParams::default();
        let s = 1e6;
        let d = laplace_derivatives(&orbit, &window, 0.005, &ch, 600.0, s, 0).unwrap();
        let l = log_laplace(&orbit, &window, 0.005, &ch, 600.0, s).unwrap().exp();
        assert_eq!(d.len(), 1);
        assert!((d[0] - l).abs() < 1e-15);
        assert!(matches!(
            laplace_derivatives(&orbit, &window, 0.005, &ch, 600.0, s, 11),
            Err(Error::DerivativeOrderTooHigh(11))
        ));
    }

    #[test]
    fn derivative_signs_alternate() {
        let (orbit, window) = setup();
        for m in 1..=5 {
            let ch = ChannelParams::new(2.0, m as f64, 10f64.powf(-1.3)).unwrap();
            for &r in &[500.0, 900.0, 1400.0] {
                for &s in &[1e4, 1e6, 1e8] {
                    let d = laplace_derivatives(&orbit, &window, 0.005, &ch, r, s, m - 1).unwrap();
                    for (t, v) in d.iter().enumerate() {
                        let signed = if t % 2 == 0 { *v } else { -*v };
                        assert!(signed >= 0.0, "m={m} r={r} s={s} t={t}: {v}");
                    }
                }
            }
        }
    }
}
