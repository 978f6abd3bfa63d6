//! Analytic coverage probabilities.
//!
//! * SIR on one orbit: `P[H² D^{−α} ≥ γ I]` averaged over the nearest distance.
//!   With integer Nakagami shape `m` the fading power is Gamma(m, 1/m), whose
//!   CCDF `e^{−mx} Σ_{t<m} (mx)ᵗ/t!` turns the conditional probability into
//!   `Σ_{t<m} (−s)ᵗ ℒ⁽ᵗ⁾(s)/t!` at `s = mγDᵅ`.
//! * SNR on one orbit: the same average with the noise term in place of `I`.
//! * Max-SIR over several orbits on orthogonal resources:
//!   `1 − Πₙ (1 − pₙ)` given that every orbit has a visible satellite.
//!
//! The unconditional versions multiply by the visibility probability. All
//! integrals run over the arc coordinate of the serving satellite.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::NearestDistanceLaw;
use crate::error::{Error, Result};
use crate::geometry::{visible_arc_length, OrbitGeometry, VisibilityWindow};
use crate::interference::{ArcInterference, ChannelParams};
use crate::numerics::QuadratureSpec;
use crate::{db_to_linear, linear_to_db};

/// A network of orbits sharing one altitude.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstellationSpec {
    orbits: Vec<(OrbitGeometry, f64)>,
    window: VisibilityWindow,
    channel: ChannelParams,
}

impl ConstellationSpec {
    /// `orbits` pairs each orbit with its density (satellites per km).
    pub fn new(
        orbits: Vec<(OrbitGeometry, f64)>,
        window: VisibilityWindow,
        channel: ChannelParams,
    ) -> Result<Self> {
        let Some((first, _)) = orbits.first() else {
            return Err(Error::InvalidParameter("a constellation needs at least one orbit".into()));
        };
        for (i, (orbit, lambda)) in orbits.iter().enumerate() {
            if !(*lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "orbit {i}: density must be positive, got {lambda}"
                )));
            }
            if (orbit.radius() - first.radius()).abs() > 1e-9 * first.radius() {
                return Err(Error::InvalidParameter(format!(
                    "orbit {i}: all orbits must share one altitude ({} km vs {} km)",
                    orbit.altitude(),
                    first.altitude()
                )));
            }
            window.check(orbit)?;
        }
        Ok(Self {
            orbits,
            window,
            channel,
        })
    }

    pub fn orbits(&self) -> &[(OrbitGeometry, f64)] {
        &self.orbits
    }

    pub fn window(&self) -> &VisibilityWindow {
        &self.window
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Same constellation restricted to the first `n` orbits.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        Self::new(self.orbits[..n.min(self.orbits.len())].to_vec(), self.window, self.channel)
    }
}

/// Downlink budget used by the SNR expressions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Transmit power (dBm).
    pub p_dbm: f64,
    /// Effective serving gain (dBi).
    pub g_serve_dbi: f64,
    /// Thermal noise density (dBm/Hz).
    pub noise_density_dbm_hz: f64,
    /// Receiver noise figure (dB).
    pub noise_figure_db: f64,
    /// Signal bandwidth (Hz).
    pub bandwidth_hz: f64,
}

impl LinkBudget {
    /// Unit of the distances entering `rᵅ` in SNR computations.
    pub const DISTANCE_UNIT: &'static str = "m";

    pub fn new(
        p_dbm: f64,
        g_serve_dbi: f64,
        noise_density_dbm_hz: f64,
        noise_figure_db: f64,
        bandwidth_hz: f64,
    ) -> Result<Self> {
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {bandwidth_hz}"
            )));
        }
        for (name, v) in [
            ("p_dbm", p_dbm),
            ("g_serve_dbi", g_serve_dbi),
            ("noise_density_dbm_hz", noise_density_dbm_hz),
            ("noise_figure_db", noise_figure_db),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        Ok(Self {
            p_dbm,
            g_serve_dbi,
            noise_density_dbm_hz,
            noise_figure_db,
            bandwidth_hz,
        })
    }

    /// Noise power σ² in mW.
    pub fn noise_power_mw(&self) -> f64 {
        db_to_linear(self.noise_density_dbm_hz + self.noise_figure_db + linear_to_db(self.bandwidth_hz))
    }

    /// `P · G_serve` in mW.
    pub fn signal_scale_mw(&self) -> f64 {
        db_to_linear(self.p_dbm + self.g_serve_dbi)
    }

    /// `σ² / (P G)`, the noise level relative to unit path gain.
    pub fn noise_to_signal(&self) -> f64 {
        self.noise_power_mw() / self.signal_scale_mw()
    }
}

/// What a [`CoverageCurve`] measures and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    SirAnalytic,
    SnrAnalytic,
    MaxSirAnalytic,
    SirMc,
    SnrMc,
    SinrMc,
    MaxSirMc,
    /// Max-SIR coverage conditioned on at least one orbit being visible,
    /// rather than on all of them. Not an analytic counterpart.
    MaxSirAnyMc,
}

impl CurveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            CurveKind::SirAnalytic => "sir-analytic",
            CurveKind::SnrAnalytic => "snr-analytic",
            CurveKind::MaxSirAnalytic => "maxsir-analytic",
            CurveKind::SirMc => "sir-mc",
            CurveKind::SnrMc => "snr-mc",
            CurveKind::SinrMc => "sinr-mc",
            CurveKind::MaxSirMc => "maxsir-mc",
            CurveKind::MaxSirAnyMc => "maxsir-any-mc",
        }
    }

    pub fn is_monte_carlo(&self) -> bool {
        matches!(
            self,
            CurveKind::SirMc
                | CurveKind::SnrMc
                | CurveKind::SinrMc
                | CurveKind::MaxSirMc
                | CurveKind::MaxSirAnyMc
        )
    }
}

/// Provenance of a curve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMetadata {
    /// Whether values are conditioned on visibility.
    pub conditional: bool,
    pub trials: Option<u64>,
    /// Trials that satisfied the conditioning event.
    pub conditioning_trials: Option<u64>,
    pub seed: Option<u64>,
    /// Unit of distances in `rᵅ` when it matters (SNR/SINR).
    pub distance_unit: Option<String>,
}

/// Coverage probability over a grid of thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    pub kind: CurveKind,
    pub thresholds_db: Vec<f64>,
    pub values: Vec<f64>,
    /// Per-point 95 % Wilson interval for Monte-Carlo curves.
    pub intervals: Option<Vec<(f64, f64)>>,
    pub metadata: CurveMetadata,
}

impl CoverageCurve {
    /// Largest pointwise `|self − other|` over a shared grid.
    pub fn max_abs_diff(&self, other: &CoverageCurve) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Values are in `[0, 1]` and non-increasing in the threshold.
    pub fn is_valid(&self) -> bool {
        self.values.iter().all(|v| (0.0..=1.0).contains(v))
            && self.values.windows(2).all(|w| w[1] <= w[0] + 1e-12)
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "threshold must be positive and finite (linear), got {gamma}"
        )))
    }
}

fn quad_spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

/// SIR coverage on one orbit given at least one visible satellite.
///
/// `gamma` is linear. Requires an integer Nakagami shape.
pub fn sir_coverage_conditional(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    let m = ch.integer_m()?;
    let law = NearestDistanceLaw::new(*orbit, *window, lambda)?;
    let field = ArcInterference::new(orbit, window, lambda, ch, quad_spec())?;
    let value = law.expectation(
        |t, r| {
            let s = m as f64 * gamma * r.powf(ch.alpha);
            field.coverage_series_from(t, s, m)
        },
        &quad_spec(),
    )?;
    Ok(value.clamp(0.0, 1.0))
}

/// Unconditional SIR coverage on one orbit; zero when the orbit is never visible.
pub fn sir_coverage(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    ch.integer_m()?;
    let visible = visibility_factor(orbit, window, lambda)?;
    if visible == 0.0 {
        return Ok(0.0);
    }
    Ok(sir_coverage_conditional(orbit, window, lambda, ch, gamma)? * visible)
}

/// SNR coverage on one orbit given at least one visible satellite.
///
/// Path loss uses distances in metres.
pub fn snr_coverage_conditional(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    budget: &LinkBudget,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    let m = ch.integer_m()?;
    let law = NearestDistanceLaw::new(*orbit, *window, lambda)?;
    let kappa = budget.noise_to_signal();
    let value = law.expectation(
        |_, r| {
            let x = m as f64 * kappa * gamma * (r * 1e3).powf(ch.alpha);
            Ok(gamma_ccdf_integer(m, x))
        },
        &quad_spec(),
    )?;
    Ok(value.clamp(0.0, 1.0))
}

/// Unconditional SNR coverage on one orbit.
pub fn snr_coverage(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    budget: &LinkBudget,
    gamma: f64,
) -> Result<f64> {
    check_gamma(gamma)?;
    ch.integer_m()?;
    let visible = visibility_factor(orbit, window, lambda)?;
    if visible == 0.0 {
        return Ok(0.0);
    }
    Ok(snr_coverage_conditional(orbit, window, lambda, ch, budget, gamma)? * visible)
}

/// `e^{−x} Σ_{t<m} xᵗ/t!`.
pub(crate) fn gamma_ccdf_integer(m: usize, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for t in 1..m {
        term *= x / t as f64;
        sum += term;
    }
    (-x).exp() * sum
}

fn visibility_factor(orbit: &OrbitGeometry, window: &VisibilityWindow, lambda: f64) -> Result<f64> {
    window.check(orbit)?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "satellite density must be positive, got {lambda}"
        )));
    }
    Ok(-(-lambda * visible_arc_length(orbit, window)).exp_m1())
}

/// Per-orbit conditional SIR coverages, failing on any orbit that is never visible.
pub fn per_orbit_sir_coverage(spec: &ConstellationSpec, gamma: f64) -> Result<Vec<f64>> {
    check_gamma(gamma)?;
    spec.channel.integer_m()?;
    for (index, (orbit, _)) in spec.orbits.iter().enumerate() {
        if visible_arc_length(orbit, &spec.window) == 0.0 {
            return Err(Error::InvisibleOrbit { index });
        }
    }
    spec.orbits
        .par_iter()
        .map(|(orbit, lambda)| {
            sir_coverage_conditional(orbit, &spec.window, *lambda, &spec.channel, gamma)
        })
        .collect()
}

/// `1 − Πₙ (1 − pₙ)`.
pub fn combine_orbit_coverages(per_orbit: &[f64]) -> f64 {
    1.0 - per_orbit.iter().map(|p| 1.0 - p).product::<f64>()
}

/// Max-SIR coverage given that every orbit has a visible satellite.
pub fn max_sir_coverage_conditional(spec: &ConstellationSpec, gamma: f64) -> Result<f64> {
    Ok(combine_orbit_coverages(&per_orbit_sir_coverage(spec, gamma)?))
}

/// Max-SIR coverage: the conditional value times `Πₙ (1 − e^{−λₙLₙ})`.
pub fn max_sir_coverage(spec: &ConstellationSpec, gamma: f64) -> Result<f64> {
    let conditional = max_sir_coverage_conditional(spec, gamma)?;
    let all_visible: f64 = spec
        .orbits
        .iter()
        .map(|(orbit, lambda)| -(-lambda * visible_arc_length(orbit, &spec.window)).exp_m1())
        .product();
    Ok(conditional * all_visible)
}

fn analytic_curve<F>(kind: CurveKind, thresholds_db: &[f64], conditional: bool, f: F) -> Result<CoverageCurve>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let values = thresholds_db
        .par_iter()
        .map(|&db| f(db_to_linear(db)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageCurve {
        kind,
        thresholds_db: thresholds_db.to_vec(),
        values,
        intervals: None,
        metadata: CurveMetadata {
            conditional,
            ..Default::default()
        },
    })
}

/// SIR coverage curve on one orbit over thresholds in dB.
pub fn sir_curve(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    thresholds_db: &[f64],
    conditional: bool,
) -> Result<CoverageCurve> {
    analytic_curve(CurveKind::SirAnalytic, thresholds_db, conditional, |g| {
        if conditional {
            sir_coverage_conditional(orbit, window, lambda, ch, g)
        } else {
            sir_coverage(orbit, window, lambda, ch, g)
        }
    })
}

/// SNR coverage curve on one orbit over thresholds in dB.
pub fn snr_curve(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    budget: &LinkBudget,
    thresholds_db: &[f64],
    conditional: bool,
) -> Result<CoverageCurve> {
    let mut curve = analytic_curve(CurveKind::SnrAnalytic, thresholds_db, conditional, |g| {
        if conditional {
            snr_coverage_conditional(orbit, window, lambda, ch, budget, g)
        } else {
            snr_coverage(orbit, window, lambda, ch, budget, g)
        }
    })?;
    curve.metadata.distance_unit = Some(LinkBudget::DISTANCE_UNIT.into());
    Ok(curve)
}

/// Max-SIR coverage curve over thresholds in dB.
pub fn max_sir_curve(
    spec: &ConstellationSpec,
    thresholds_db: &[f64],
    conditional: bool,
) -> Result<CoverageCurve> {
    analytic_curve(CurveKind::MaxSirAnalytic, thresholds_db, conditional, |g| {
        if conditional {
            max_sir_coverage_conditional(spec, g)
        } else {
            max_sir_coverage(spec, g)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn setup(theta: f64) -> (OrbitGeometry, VisibilityWindow) {
        let orbit = OrbitGeometry::new(6371.0, 500.0, theta, 0.0).unwrap();
        let window = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians()).unwrap();
        (orbit, window)
    }

    #[test]
    fn vanishing_threshold_gives_full_coverage() {
        let (orbit, window) = setup(FRAC_PI_2);
        for m in 1..=3 {
            let ch = ChannelParams::new(2.0, m as f64, 10f64.powf(-1.3)).unwrap();
            let p = sir_coverage_conditional(&orbit, &window, 0.005, &ch, 1e-12).unwrap();
            assert!(p >= 1.0 - 1e-6, "m={m}: {p}");
        }
    }

    #[test]
    fn invisible_orbit_has_no_coverage() {
        let (orbit, window) = setup(0.0);
        let ch = ChannelParams::default();
        assert_eq!(sir_coverage(&orbit, &window, 0.005, &ch, 1.0).unwrap(), 0.0);
        let budget = LinkBudget::new(40.0, 30.0, -174.0, 11.0, 1e7).unwrap();
        assert_eq!(snr_coverage(&orbit, &window, 0.005, &ch, &budget, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn dense_limit_matches_conditional() {
        let (orbit, window) = setup(FRAC_PI_2);
        let ch = ChannelParams::default();
        let c = sir_coverage_conditional(&orbit, &window, 10.0, &ch, 1.0).unwrap();
        let u = sir_coverage(&orbit, &window, 10.0, &ch, 1.0).unwrap();
        assert!((c - u).abs() <= 1e-10);
    }

    #[test]
    fn non_integer_shape_rejected() {
        let (orbit, window) = setup(FRAC_PI_2);
        let ch = ChannelParams::new(2.0, 1.5, 0.05).unwrap();
        assert!(matches!(
            sir_coverage_conditional(&orbit, &window, 0.005, &ch, 1.0),
            Err(Error::NonIntegerShape(_))
        ));
    }

    #[test]
    fn snr_noiseless_limit_and_rayleigh_reduction() {
        let (orbit, window) = setup(FRAC_PI_2);
        let ch = ChannelParams::default();
        let quiet = LinkBudget::new(40.0, 30.0, -400.0, 0.0, 1e6).unwrap();
        let p = snr_coverage_conditional(&orbit, &window, 0.005, &ch, &quiet, 10.0).unwrap();
        assert!((p - 1.0).abs() < 1e-9);

        let budget = LinkBudget::new(40.0, 30.0, -174.0, 11.0, 1e9).unwrap();
        let gamma = db_to_linear(20.0);
        let generic = snr_coverage_conditional(&orbit, &window, 0.005, &ch, &budget, gamma).unwrap();
        let law = NearestDistanceLaw::new(orbit, window, 0.005).unwrap();
        let kappa = budget.noise_to_signal();
        let rayleigh = law
            .expectation(|_, r| Ok((-kappa * gamma * (r * 1e3).powi(2)).exp()), &quad_spec())
            .unwrap();
        assert!((generic - rayleigh).abs() <= 1e-12, "{generic} vs {rayleigh}");
    }

    #[test]
    fn noise_power_of_reference_budget() {
        let b = LinkBudget::new(40.0, 30.0, -174.0, 11.0, 1e7).unwrap();
        assert!((linear_to_db(b.noise_power_mw()) + 93.0).abs() < 1e-9);
        assert!((linear_to_db(b.noise_to_signal()) + 163.0).abs() < 1e-9);
    }

    #[test]
    fn single_orbit_max_sir_equals_sir() {
        let (orbit, window) = setup(FRAC_PI_2);
        let ch = ChannelParams::default();
        let spec = ConstellationSpec::new(vec![(orbit, 0.005)], window, ch).unwrap();
        for db in [-5.0, 0.0, 10.0] {
            let g = db_to_linear(db);
            let a = max_sir_coverage(&spec, g).unwrap();
            let b = sir_coverage(&orbit, &window, 0.005, &ch, g).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn invisible_orbit_rejected_by_index() {
        let (orbit, window) = setup(FRAC_PI_2);
        let flat = orbit.with_theta(0.0).unwrap();
        let spec =
            ConstellationSpec::new(vec![(orbit, 0.005), (flat, 0.005)], window, ChannelParams::default())
                .unwrap();
        assert!(matches!(
            max_sir_coverage(&spec, 1.0),
            Err(Error::InvisibleOrbit { index: 1 })
        ));
    }

    #[test]
    fn constellation_validation() {
        let (orbit, window) = setup(FRAC_PI_2);
        let ch = ChannelParams::default();
        assert!(ConstellationSpec::new(vec![], window, ch).is_err());
        assert!(ConstellationSpec::new(vec![(orbit, 0.0)], window, ch).is_err());
        let high = OrbitGeometry::new(6371.0, 1000.0, FRAC_PI_2, 0.0).unwrap();
        assert!(ConstellationSpec::new(vec![(orbit, 0.005), (high, 0.005)], window, ch).is_err());
    }

    #[test]
    fn identical_orbits_combine_as_independent_maximum() {
        let p: f64 = 0.37;
        for n in 1..5 {
            let v = combine_orbit_coverages(&vec![p; n]);
            assert!((v - (1.0 - (1.0 - p).powi(n as i32))).abs() < 1e-15);
        }
    }

    #[test]
    fn curve_is_monotone() {
        let (orbit, window) = setup(FRAC_PI_2 + PI / 36.0);
        let grid: Vec<f64> = (-2..=6).map(|i| 5.0 * i as f64).collect();
        let c = sir_curve(&orbit, &window, 0.005, &ChannelParams::default(), &grid, false).unwrap();
        assert!(c.is_valid(), "{:?}", c.values);
    }
}
