//! The `geometry`, `coverage` and `sweep` commands.

use std::fs;
use std::path::{Path, PathBuf};

use orbitcov_core::coverage::{max_sir_curve, sir_curve, snr_curve};
use orbitcov_core::montecarlo::{
    empirical_max_sir_coverage, empirical_nearest_ccdf, empirical_sir_coverage,
    empirical_snr_sinr_coverage, CurvePair,
};
use orbitcov_core::{
    orbital_speed, visibility_probability, visible_arc_length, visible_time, CoverageCurve,
    McConfig, NearestDistanceLaw, VisibilityWindow,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::{
    curve_rows, delta_rows, join_values, to_json, write_results, write_rows, Companion,
    CurveSummary, DeltaRow, ResultRow, RowContext, ScenarioSummary, DELTA_HEADER, RESULT_HEADER,
    SCHEMA_VERSION,
};

/// Command-line overrides of the `[mc]` section.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
}

impl RunOptions {
    fn mc_config(&self, config: &ScenarioConfig) -> Result<Option<McConfig>, CliError> {
        let trials = self.trials.or(config.mc.map(|m| m.trials));
        let seed = self.seed.or(config.mc.map(|m| m.seed));
        match (trials, seed) {
            (None, None) => Ok(None),
            (Some(t), Some(s)) => Ok(Some(
                McConfig::new(t, s).map_err(|e| CliError::Config(format!("mc.trials: {e}")))?,
            )),
            (Some(_), None) => Err(CliError::Config("mc.seed: required when simulating".into())),
            (None, Some(_)) => Err(CliError::Config("mc.trials: required when simulating".into())),
        }
    }
}

/// Everything one scenario contributes to a coverage table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub rows: Vec<ResultRow>,
    pub deltas: Vec<DeltaRow>,
    pub summary: ScenarioSummary,
}

fn pick(pair: CurvePair, conditional: bool) -> CoverageCurve {
    if conditional {
        pair.conditional
    } else {
        pair.unconditional
    }
}

/// Evaluates the analytic and simulated curves of one scenario.
pub fn evaluate(config: &ScenarioConfig, opts: &RunOptions) -> Result<ScenarioOutput, CliError> {
    let scenario: Scenario = config.resolve()?;
    let mc = opts.mc_config(config)?;
    let spec = &scenario.constellation;
    let ch = *spec.channel();
    let window = *spec.window();
    let grid = &scenario.thresholds_db;
    let conditional = scenario.conditional;
    let mut notices = Vec::new();

    let analytic = ch.integer_m().is_ok();
    if !analytic {
        if mc.is_none() {
            return Err(CliError::Config(format!(
                "channel.m: m = {} is not an integer; closed forms need integer m, so an [mc] section is required",
                ch.m
            )));
        }
        notices.push(format!(
            "m = {} is not an integer: analytic curves skipped, results are Monte Carlo only",
            ch.m
        ));
    }

    let mut curves: Vec<CoverageCurve> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if spec.len() == 1 {
        let (orbit, lambda) = spec.orbits()[0];
        let mut sir_at = None;
        let mut snr_at = None;
        if analytic {
            sir_at = Some(curves.len());
            curves.push(sir_curve(&orbit, &window, lambda, &ch, grid, conditional)?);
            if let Some(budget) = &scenario.budget {
                snr_at = Some(curves.len());
                curves.push(snr_curve(&orbit, &window, lambda, &ch, budget, grid, conditional)?);
            }
        }
        if let Some(cfg) = &mc {
            if let Some(budget) = &scenario.budget {
                let link = empirical_snr_sinr_coverage(&orbit, &window, lambda, &ch, budget, grid, cfg)?;
                if let Some(a) = sir_at {
                    pairs.push((a, curves.len()));
                }
                curves.push(pick(link.sir, conditional));
                if let Some(a) = snr_at {
                    pairs.push((a, curves.len()));
                }
                curves.push(pick(link.snr, conditional));
                curves.push(pick(link.sinr, conditional));
            } else {
                if let Some(a) = sir_at {
                    pairs.push((a, curves.len()));
                }
                let pair = empirical_sir_coverage(&orbit, &window, lambda, &ch, grid, cfg)?;
                curves.push(pick(pair, conditional));
            }
        }
    } else {
        if scenario.budget.is_some() {
            notices.push("link budget ignored: SNR curves are single-orbit only".into());
        }
        let mut max_at = None;
        if analytic {
            max_at = Some(curves.len());
            curves.push(max_sir_curve(spec, grid, conditional)?);
        }
        if let Some(cfg) = &mc {
            let sim = empirical_max_sir_coverage(spec, grid, cfg)?;
            if let Some(a) = max_at {
                pairs.push((a, curves.len()));
            }
            curves.push(pick(sim.all_visible, conditional));
            curves.push(sim.any_visible);
        }
    }

    let orbits = &scenario.config.orbits;
    let ctx = RowContext {
        scenario_id: scenario.id.clone(),
        theta_deg: join_values(orbits.iter().map(|o| o.theta_deg)),
        lambda_per_km: join_values(orbits.iter().map(|o| o.lambda_per_km)),
        alpha: ch.alpha,
        m: ch.m,
        n_orbits: orbits.len(),
    };
    let rows = curves.iter().flat_map(|c| curve_rows(&ctx, c)).collect();
    let deltas = pairs
        .iter()
        .flat_map(|&(a, m)| delta_rows(&scenario.id, &curves[a], &curves[m]))
        .collect();
    Ok(ScenarioOutput {
        rows,
        deltas,
        summary: ScenarioSummary {
            scenario_id: scenario.id,
            notices,
            curves: curves.iter().map(CurveSummary::from).collect(),
        },
    })
}

/// Files written by a command, in the order written.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Written {
    pub files: Vec<PathBuf>,
    pub notices: Vec<String>,
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], written: &mut Written) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, bytes)?;
    written.files.push(path);
    Ok(())
}

fn write_tables(command: &str, outputs: Vec<ScenarioOutput>, out_dir: &Path) -> Result<Written, CliError> {
    let mut written = Written::default();
    let mut rows = Vec::new();
    let mut deltas = Vec::new();
    let mut scenarios = Vec::new();
    for o in outputs {
        rows.extend(o.rows);
        deltas.extend(o.deltas);
        written
            .notices
            .extend(o.summary.notices.iter().map(|n| format!("{}: {n}", o.summary.scenario_id)));
        scenarios.push(o.summary);
    }

    let mut buf = Vec::new();
    write_results(&mut buf, &rows)?;
    write_file(out_dir, &format!("{command}.csv"), &buf, &mut written)?;

    let mut buf = Vec::new();
    if deltas.is_empty() {
        buf.extend_from_slice(format!("{DELTA_HEADER}\n").as_bytes());
    } else {
        write_rows(&mut buf, &deltas)?;
    }
    write_file(out_dir, &format!("{command}_delta.csv"), &buf, &mut written)?;

    let companion = Companion {
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        table: format!("{command}.csv"),
        header: RESULT_HEADER.into(),
        scenarios,
    };
    write_file(out_dir, &format!("{command}.json"), to_json(&companion).as_bytes(), &mut written)?;
    Ok(written)
}

pub fn cmd_coverage(config: &ScenarioConfig, opts: &RunOptions, out_dir: &Path) -> Result<Written, CliError> {
    let output = evaluate(config, opts)?;
    write_tables("coverage", vec![output], out_dir)
}

pub fn cmd_sweep(config: &ScenarioConfig, opts: &RunOptions, out_dir: &Path) -> Result<Written, CliError> {
    let Some(sweep) = &config.sweep else {
        return Err(CliError::Config("sweep: section required by the sweep command".into()));
    };
    // Fail on the base scenario before fanning out.
    config.resolve()?;
    let outputs = sweep
        .values
        .par_iter()
        .map(|&v| evaluate(&config.with_parameter(sweep.parameter, v), opts))
        .collect::<Result<Vec<_>, _>>()?;
    write_tables("sweep", outputs, out_dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryRow {
    pub omega_min_deg: f64,
    pub theta_deg: f64,
    pub arc_length_km: f64,
    pub visible_time_s: f64,
    /// Probability of at least one visible satellite at the first orbit's density.
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub orbit: usize,
    pub theta_deg: f64,
    pub lambda_per_km: f64,
    pub r_km: f64,
    pub ccdf: f64,
    pub ccdf_mc: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GeometrySummary {
    schema_version: u32,
    altitude_km: f64,
    orbital_speed_m_s: f64,
    tables: Vec<String>,
}

pub fn geometry_rows(scenario: &Scenario) -> Result<Vec<GeometryRow>, CliError> {
    let Some(geo) = &scenario.config.geometry else {
        return Err(CliError::Config("geometry: section required by the geometry command".into()));
    };
    let (base, lambda) = scenario.constellation.orbits()[0];
    let mut rows = Vec::new();
    for &omega in &geo.omega_min_deg {
        let window = VisibilityWindow::for_orbit(&base, omega.to_radians())?;
        for theta in geo.thetas_deg() {
            let orbit = base.with_theta(theta.to_radians())?;
            rows.push(GeometryRow {
                omega_min_deg: omega,
                theta_deg: theta,
                arc_length_km: visible_arc_length(&orbit, &window),
                visible_time_s: visible_time(&orbit, &window, &scenario.earth),
                visibility: visibility_probability(&[lambda], &[orbit], &window)?,
            });
        }
    }
    Ok(rows)
}

pub fn distance_rows(scenario: &Scenario, points: usize, mc: Option<&McConfig>) -> Result<Vec<DistanceRow>, CliError> {
    let window = *scenario.constellation.window();
    let per_orbit = scenario
        .constellation
        .orbits()
        .par_iter()
        .enumerate()
        .map(|(i, &(orbit, lambda))| -> Result<Vec<DistanceRow>, CliError> {
            let law = NearestDistanceLaw::new(orbit, window, lambda)?;
            let grid: Vec<f64> = if points == 1 {
                vec![law.d_min()]
            } else {
                (0..points)
                    .map(|k| law.d_min() + (law.d_max() - law.d_min()) * k as f64 / (points - 1) as f64)
                    .collect()
            };
            let emp = mc
                .map(|cfg| empirical_nearest_ccdf(&orbit, &window, lambda, &grid, cfg))
                .transpose()?;
            Ok(grid
                .iter()
                .enumerate()
                .map(|(k, &r)| DistanceRow {
                    orbit: i,
                    theta_deg: scenario.config.orbits[i].theta_deg,
                    lambda_per_km: lambda,
                    r_km: r,
                    ccdf: law.ccdf(r),
                    ccdf_mc: emp.as_ref().map(|e| e[k]),
                    seed: mc.map(|c| c.seed),
                })
                .collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(per_orbit.into_iter().flatten().collect())
}

pub fn cmd_geometry(config: &ScenarioConfig, opts: &RunOptions, out_dir: &Path) -> Result<Written, CliError> {
    let scenario = config.resolve()?;
    let mut written = Written::default();
    let rows = geometry_rows(&scenario)?;
    let mut buf = Vec::new();
    write_rows(&mut buf, &rows)?;
    write_file(out_dir, "geometry.csv", &buf, &mut written)?;
    let mut tables = vec!["geometry.csv".to_string()];

    if let Some(points) = config.geometry.as_ref().and_then(|g| g.ccdf_points) {
        let mc = opts.mc_config(config)?;
        let rows = distance_rows(&scenario, points, mc.as_ref())?;
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows)?;
        write_file(out_dir, "nearest_distance.csv", &buf, &mut written)?;
        tables.push("nearest_distance.csv".into());
    }

    let (orbit, _) = scenario.constellation.orbits()[0];
    let summary = GeometrySummary {
        schema_version: SCHEMA_VERSION,
        altitude_km: orbit.altitude(),
        orbital_speed_m_s: orbital_speed(&orbit, &scenario.earth),
        tables,
    };
    write_file(out_dir, "geometry.json", to_json(&summary).as_bytes(), &mut written)?;
    Ok(written)
}
