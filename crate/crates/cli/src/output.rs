//! CSV and JSON writers.
//!
//! Every coverage table has the same header, [`RESULT_HEADER`]. Multi-orbit
//! scenarios join the per-orbit `theta_deg` and `lambda_per_km` values with
//! `;`. Analytic rows leave the interval columns and `seed` empty.

use std::io::{Read, Write};

use orbitcov_core::CoverageCurve;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Version of the table layouts and the companion JSON.
pub const SCHEMA_VERSION: u32 = 1;

pub const RESULT_HEADER: &str =
    "scenario_id,curve_kind,gamma_db,value,ci_low,ci_high,theta_deg,lambda_per_km,alpha,m,n_orbits,seed";

pub const DELTA_HEADER: &str = "scenario_id,analytic_kind,mc_kind,gamma_db,analytic,mc,delta,ci_low,ci_high";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub scenario_id: String,
    pub curve_kind: String,
    pub gamma_db: f64,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub theta_deg: String,
    pub lambda_per_km: String,
    pub alpha: f64,
    pub m: f64,
    pub n_orbits: usize,
    pub seed: Option<u64>,
}

/// Analytic value next to its simulated counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRow {
    pub scenario_id: String,
    pub analytic_kind: String,
    pub mc_kind: String,
    pub gamma_db: f64,
    pub analytic: f64,
    pub mc: f64,
    /// `analytic − mc`.
    pub delta: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Per-scenario columns repeated on every row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowContext {
    pub scenario_id: String,
    pub theta_deg: String,
    pub lambda_per_km: String,
    pub alpha: f64,
    pub m: f64,
    pub n_orbits: usize,
}

pub fn join_values(values: impl IntoIterator<Item = f64>) -> String {
    values
        .into_iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(";")
}

pub fn curve_rows(ctx: &RowContext, curve: &CoverageCurve) -> Vec<ResultRow> {
    curve
        .thresholds_db
        .iter()
        .zip(&curve.values)
        .enumerate()
        .map(|(i, (&gamma_db, &value))| {
            let ci = curve.intervals.as_ref().map(|iv| iv[i]);
            ResultRow {
                scenario_id: ctx.scenario_id.clone(),
                curve_kind: curve.kind.as_str().to_string(),
                gamma_db,
                value,
                ci_low: ci.map(|c| c.0),
                ci_high: ci.map(|c| c.1),
                theta_deg: ctx.theta_deg.clone(),
                lambda_per_km: ctx.lambda_per_km.clone(),
                alpha: ctx.alpha,
                m: ctx.m,
                n_orbits: ctx.n_orbits,
                seed: curve.metadata.seed,
            }
        })
        .collect()
}

/// Pointwise differences between an analytic curve and a simulated one on
/// the same grid.
pub fn delta_rows(scenario_id: &str, analytic: &CoverageCurve, mc: &CoverageCurve) -> Vec<DeltaRow> {
    let intervals = mc.intervals.clone().unwrap_or_default();
    analytic
        .thresholds_db
        .iter()
        .enumerate()
        .map(|(i, &gamma_db)| {
            let (lo, hi) = intervals.get(i).copied().unwrap_or((f64::NAN, f64::NAN));
            DeltaRow {
                scenario_id: scenario_id.to_string(),
                analytic_kind: analytic.kind.as_str().to_string(),
                mc_kind: mc.kind.as_str().to_string(),
                gamma_db,
                analytic: analytic.values[i],
                mc: mc.values[i],
                delta: analytic.values[i] - mc.values[i],
                ci_low: lo,
                ci_high: hi,
            }
        })
        .collect()
}

pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a result table; the header is emitted even with no rows.
pub fn write_results<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<(), CliError> {
    if rows.is_empty() {
        writeln!(out, "{RESULT_HEADER}")?;
        return Ok(());
    }
    write_rows(out, rows)
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != RESULT_HEADER {
        return Err(CliError::Config(format!("unexpected header {header:?}")));
    }
    Ok(r.deserialize().collect::<Result<Vec<ResultRow>, _>>()?)
}

/// Curve provenance for the companion JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub kind: String,
    pub conditional: bool,
    pub trials: Option<u64>,
    pub conditioning_trials: Option<u64>,
    pub seed: Option<u64>,
    pub distance_unit: Option<String>,
}

impl From<&CoverageCurve> for CurveSummary {
    fn from(c: &CoverageCurve) -> Self {
        Self {
            kind: c.kind.as_str().to_string(),
            conditional: c.metadata.conditional,
            trials: c.metadata.trials,
            conditioning_trials: c.metadata.conditioning_trials,
            seed: c.metadata.seed,
            distance_unit: c.metadata.distance_unit.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub scenario_id: String,
    pub notices: Vec<String>,
    pub curves: Vec<CurveSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Companion {
    pub schema_version: u32,
    pub command: String,
    pub table: String,
    pub header: String,
    pub scenarios: Vec<ScenarioSummary>,
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use orbitcov_core::{CurveKind, CurveMetadata};

    fn sample_rows() -> Vec<ResultRow> {
        let ctx = RowContext {
            scenario_id: "x/alpha=3".into(),
            theta_deg: join_values([90.0, 100.0]),
            lambda_per_km: join_values([0.005, 0.001]),
            alpha: 3.0,
            m: 1.0,
            n_orbits: 2,
        };
        let analytic = CoverageCurve {
            kind: CurveKind::MaxSirAnalytic,
            thresholds_db: vec![-10.0, 0.1],
            values: vec![0.9876543210123456, 1e-17],
            intervals: None,
            metadata: CurveMetadata::default(),
        };
        let mc = CoverageCurve {
            kind: CurveKind::MaxSirMc,
            thresholds_db: vec![-10.0, 0.1],
            values: vec![0.98, 0.0],
            intervals: Some(vec![(0.97, 0.99), (0.0, 0.0001)]),
            metadata: CurveMetadata {
                seed: Some(u64::MAX),
                ..Default::default()
            },
        };
        let mut rows = curve_rows(&ctx, &analytic);
        rows.extend(curve_rows(&ctx, &mc));
        rows
    }

    #[test]
    fn header_is_exact() {
        let mut buf = Vec::new();
        write_results(&mut buf, &sample_rows()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some(RESULT_HEADER));
        let mut buf = Vec::new();
        write_results(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{RESULT_HEADER}\n"));
    }

    #[test]
    fn rows_round_trip_exactly() {
        let rows = sample_rows();
        let mut buf = Vec::new();
        write_results(&mut buf, &rows).unwrap();
        let back = read_results(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[0].theta_deg, "90.0;100.0");
        assert_eq!(back[0].seed, None);
        assert_eq!(back[0].ci_low, None);
    }

    #[test]
    fn delta_is_analytic_minus_mc() {
        let a = CoverageCurve {
            kind: CurveKind::SirAnalytic,
            thresholds_db: vec![0.0],
            values: vec![0.5],
            intervals: None,
            metadata: CurveMetadata::default(),
        };
        let m = CoverageCurve {
            kind: CurveKind::SirMc,
            values: vec![0.25],
            intervals: Some(vec![(0.2, 0.3)]),
            ..a.clone()
        };
        let d = delta_rows("s", &a, &m);
        assert_eq!(d[0].delta, 0.25);
        assert_eq!((d[0].ci_low, d[0].ci_high), (0.2, 0.3));
        let mut buf = Vec::new();
        write_rows(&mut buf, &d).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with(DELTA_HEADER));
    }
}
