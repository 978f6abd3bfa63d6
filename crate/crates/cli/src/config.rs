//! Scenario files.
//!
//! A scenario is one TOML document. Angles are in degrees, lengths in km,
//! densities in satellites per km of orbit and gains in dB. Unknown keys are
//! rejected; the only defaults are the physical constants in `[earth]`.
//!
//! ```toml
//! id = "fig7"
//!
//! [window]
//! omega_min_deg = 10.0
//!
//! [[orbits]]
//! altitude_km = 500.0
//! theta_deg = 90.0
//! phi_deg = 0.0
//! lambda_per_km = 0.005
//!
//! [channel]
//! alpha = 2.0
//! m = 1.0
//! g_i_bar_db = -13.0
//!
//! [gamma_grid]
//! start_db = -10.0
//! stop_db = 30.0
//! step_db = 5.0
//!
//! [mc]
//! trials = 100000
//! seed = 7
//! ```

use std::path::Path;

use orbitcov_core::{
    db_to_linear, ChannelParams, ConstellationSpec, EarthConstants, LinkBudget, McConfig,
    OrbitGeometry, VisibilityWindow,
};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub id: String,
    #[serde(default)]
    pub earth: EarthSection,
    pub window: WindowSection,
    pub orbits: Vec<OrbitSection>,
    pub channel: ChannelSection,
    pub budget: Option<BudgetSection>,
    pub gamma_grid: GammaGrid,
    pub mc: Option<McSection>,
    #[serde(default)]
    pub output: OutputSection,
    pub geometry: Option<GeometrySection>,
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EarthSection {
    pub radius_km: f64,
    pub gravitational_constant: f64,
    pub mass_kg: f64,
}

impl Default for EarthSection {
    fn default() -> Self {
        let e = EarthConstants::default();
        Self {
            radius_km: e.radius_km,
            gravitational_constant: e.gravitational_constant,
            mass_kg: e.mass_kg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub omega_min_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSection {
    pub altitude_km: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub lambda_per_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub alpha: f64,
    pub m: f64,
    pub g_i_bar_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub p_dbm: f64,
    pub g_serve_dbi: f64,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaGrid {
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl GammaGrid {
    /// Grid points from `start_db` to `stop_db` inclusive.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize;
        (0..=n)
            .map(|k| self.start_db + k as f64 * self.step_db)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Report coverage given visibility instead of the plain probability.
    #[serde(default)]
    pub conditional: bool,
}

/// Inputs of the `geometry` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub theta_start_deg: f64,
    pub theta_stop_deg: f64,
    pub theta_step_deg: f64,
    pub omega_min_deg: Vec<f64>,
    /// Number of distances at which to tabulate the nearest-distance CCDF of
    /// each orbit; omitted means no table.
    pub ccdf_points: Option<usize>,
}

impl GeometrySection {
    pub fn thetas_deg(&self) -> Vec<f64> {
        GammaGrid {
            start_db: self.theta_start_deg,
            stop_db: self.theta_stop_deg,
            step_db: self.theta_step_deg,
        }
        .points()
    }
}

/// One-parameter sweep for the `sweep` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Alpha,
    M,
    GIBarDb,
    LambdaPerKm,
    AltitudeKm,
    ThetaDeg,
    OmegaMinDeg,
    BandwidthHz,
    /// Replicates the first orbit with evenly spaced azimuths.
    NOrbits,
}

impl SweepParameter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::M => "m",
            SweepParameter::GIBarDb => "g_i_bar_db",
            SweepParameter::LambdaPerKm => "lambda_per_km",
            SweepParameter::AltitudeKm => "altitude_km",
            SweepParameter::ThetaDeg => "theta_deg",
            SweepParameter::OmegaMinDeg => "omega_min_deg",
            SweepParameter::BandwidthHz => "bandwidth_hz",
            SweepParameter::NOrbits => "n_orbits",
        }
    }
}

/// Config values converted to the core types.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub id: String,
    pub earth: EarthConstants,
    pub window: VisibilityWindow,
    pub constellation: ConstellationSpec,
    pub budget: Option<LinkBudget>,
    pub thresholds_db: Vec<f64>,
    pub mc: Option<McConfig>,
    pub conditional: bool,
    pub config: ScenarioConfig,
}

fn field_error(path: impl Into<String>, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {msg}", path.into()))
}

fn finite(path: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(field_error(path, format!("must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serialises")
    }

    /// Checks every precondition and builds the core objects.
    pub fn resolve(&self) -> Result<Scenario, CliError> {
        if self.id.trim().is_empty() || self.id.contains([',', '"', '\n']) {
            return Err(field_error("id", "must be non-empty and free of commas and quotes"));
        }
        let earth = EarthConstants::new(
            finite("earth.radius_km", self.earth.radius_km)?,
            finite("earth.gravitational_constant", self.earth.gravitational_constant)?,
            finite("earth.mass_kg", self.earth.mass_kg)?,
        )
        .map_err(|e| field_error("earth", e))?;

        let omega = finite("window.omega_min_deg", self.window.omega_min_deg)?;
        if !(0.0..90.0).contains(&omega) {
            return Err(field_error("window.omega_min_deg", format!("must be in [0, 90), got {omega}")));
        }

        let Some(first) = self.orbits.first() else {
            return Err(field_error("orbits", "at least one orbit is required"));
        };
        let mut orbits = Vec::with_capacity(self.orbits.len());
        for (i, o) in self.orbits.iter().enumerate() {
            let path = |f: &str| format!("orbits[{i}].{f}");
            let altitude = finite(&path("altitude_km"), o.altitude_km)?;
            if altitude <= 0.0 {
                return Err(field_error(path("altitude_km"), format!("must be positive, got {altitude}")));
            }
            if altitude != first.altitude_km {
                return Err(field_error(
                    path("altitude_km"),
                    format!("all orbits must share one altitude ({} km in orbits[0])", first.altitude_km),
                ));
            }
            let theta = finite(&path("theta_deg"), o.theta_deg)?;
            if !(0.0..=180.0).contains(&theta) {
                return Err(field_error(path("theta_deg"), format!("must be in [0, 180], got {theta}")));
            }
            let phi = finite(&path("phi_deg"), o.phi_deg)?;
            let lambda = finite(&path("lambda_per_km"), o.lambda_per_km)?;
            if lambda <= 0.0 {
                return Err(field_error(path("lambda_per_km"), format!("must be positive, got {lambda}")));
            }
            let orbit = OrbitGeometry::new(earth.radius_km, altitude, theta.to_radians(), phi.to_radians())
                .map_err(|e| field_error(path("theta_deg"), e))?;
            orbits.push((orbit, lambda));
        }
        let window = VisibilityWindow::for_orbit(&orbits[0].0, omega.to_radians())
            .map_err(|e| field_error("window.omega_min_deg", e))?;

        let c = &self.channel;
        let channel = ChannelParams::new(
            finite("channel.alpha", c.alpha)?,
            finite("channel.m", c.m)?,
            db_to_linear(finite("channel.g_i_bar_db", c.g_i_bar_db)?),
        )
        .map_err(|e| {
            let field = if !(c.alpha > 0.0) {
                "channel.alpha"
            } else if !(c.m >= 0.5) {
                "channel.m"
            } else {
                "channel.g_i_bar_db"
            };
            field_error(field, e)
        })?;
        let constellation = ConstellationSpec::new(orbits, window, channel)
            .map_err(|e| field_error("orbits", e))?;

        let budget = self
            .budget
            .map(|b| {
                LinkBudget::new(
                    b.p_dbm,
                    b.g_serve_dbi,
                    b.noise_density_dbm_hz,
                    b.noise_figure_db,
                    b.bandwidth_hz,
                )
                .map_err(|e| field_error("budget", e))
            })
            .transpose()?;

        let g = &self.gamma_grid;
        for (name, v) in [("start_db", g.start_db), ("stop_db", g.stop_db), ("step_db", g.step_db)] {
            finite(&format!("gamma_grid.{name}"), v)?;
        }
        if !(g.step_db > 0.0) {
            return Err(field_error("gamma_grid.step_db", format!("must be positive, got {}", g.step_db)));
        }
        if g.stop_db < g.start_db {
            return Err(field_error("gamma_grid.stop_db", "must not be below start_db"));
        }
        let thresholds_db = g.points();
        if thresholds_db.len() > 10_000 {
            return Err(field_error("gamma_grid", "more than 10000 grid points"));
        }

        let mc = self
            .mc
            .map(|m| McConfig::new(m.trials, m.seed).map_err(|e| field_error("mc.trials", e)))
            .transpose()?;

        if let Some(geo) = &self.geometry {
            for (name, v) in [
                ("theta_start_deg", geo.theta_start_deg),
                ("theta_stop_deg", geo.theta_stop_deg),
                ("theta_step_deg", geo.theta_step_deg),
            ] {
                finite(&format!("geometry.{name}"), v)?;
            }
            if !(0.0..=180.0).contains(&geo.theta_start_deg)
                || !(0.0..=180.0).contains(&geo.theta_stop_deg)
                || geo.theta_stop_deg < geo.theta_start_deg
            {
                return Err(field_error("geometry.theta_stop_deg", "θ range must lie in [0, 180] and be ordered"));
            }
            if !(geo.theta_step_deg > 0.0) {
                return Err(field_error("geometry.theta_step_deg", "must be positive"));
            }
            if geo.omega_min_deg.is_empty() {
                return Err(field_error("geometry.omega_min_deg", "list must not be empty"));
            }
            for (i, w) in geo.omega_min_deg.iter().enumerate() {
                if !(0.0..90.0).contains(w) {
                    return Err(field_error(format!("geometry.omega_min_deg[{i}]"), "must be in [0, 90)"));
                }
            }
            if geo.ccdf_points == Some(0) {
                return Err(field_error("geometry.ccdf_points", "must be at least 1"));
            }
        }

        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(field_error("sweep.values", "list must not be empty"));
            }
            for (i, v) in sweep.values.iter().enumerate() {
                finite(&format!("sweep.values[{i}]"), *v)?;
                if sweep.parameter == SweepParameter::NOrbits && !(v.fract() == 0.0 && *v >= 1.0) {
                    return Err(field_error(format!("sweep.values[{i}]"), "orbit counts must be positive integers"));
                }
            }
            if sweep.parameter == SweepParameter::BandwidthHz && self.budget.is_none() {
                return Err(field_error("sweep.parameter", "bandwidth sweeps need a [budget] section"));
            }
        }

        Ok(Scenario {
            id: self.id.clone(),
            earth,
            window,
            constellation,
            budget,
            thresholds_db,
            mc,
            conditional: self.output.conditional,
            config: self.clone(),
        })
    }

    /// Copy of this scenario with one sweep parameter set to `value`.
    pub fn with_parameter(&self, parameter: SweepParameter, value: f64) -> ScenarioConfig {
        let mut c = self.clone();
        c.sweep = None;
        c.id = format!("{}/{}={}", self.id, parameter.as_str(), value);
        match parameter {
            SweepParameter::Alpha => c.channel.alpha = value,
            SweepParameter::M => c.channel.m = value,
            SweepParameter::GIBarDb => c.channel.g_i_bar_db = value,
            SweepParameter::LambdaPerKm => c.orbits.iter_mut().for_each(|o| o.lambda_per_km = value),
            SweepParameter::AltitudeKm => c.orbits.iter_mut().for_each(|o| o.altitude_km = value),
            SweepParameter::ThetaDeg => c.orbits.iter_mut().for_each(|o| o.theta_deg = value),
            SweepParameter::OmegaMinDeg => c.window.omega_min_deg = value,
            SweepParameter::BandwidthHz => {
                if let Some(b) = c.budget.as_mut() {
                    b.bandwidth_hz = value;
                }
            }
            SweepParameter::NOrbits => {
                let n = value as usize;
                let base = c.orbits[0];
                c.orbits = (0..n)
                    .map(|k| OrbitSection {
                        phi_deg: base.phi_deg + 360.0 * k as f64 / n as f64,
                        ..base
                    })
                    .collect();
            }
        }
        c
    }
}
