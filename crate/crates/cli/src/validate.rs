//! Acceptance suite behind `orbitcov validate`.
//!
//! Each criterion returns a list of named checks. A check records the worst
//! value seen, the bound it is held to and whether it passed; locations of the
//! worst case go into `detail`. Reports contain no timings, so two runs with
//! the same seed serialise to identical bytes.

use std::f64::consts::{FRAC_PI_2, PI};

use orbitcov_core::coverage::{max_sir_curve, sir_curve, snr_curve};
use orbitcov_core::interference::{laplace_derivatives_with, log_laplace_with};
use orbitcov_core::montecarlo::{
    empirical_laplace, empirical_max_sir_coverage, empirical_nearest_ccdf, empirical_sir_coverage,
    empirical_snr_sinr_coverage,
};
use orbitcov_core::{
    db_to_linear, log_laplace, max_sir_coverage_conditional, orbital_speed, visible_arc_length,
    visible_time, ChannelParams, ConstellationSpec, CoverageCurve, EarthConstants, LinkBudget,
    McConfig, NearestDistanceLaw, OrbitGeometry, QuadratureSpec, RandomSource, VisibilityWindow,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::SCHEMA_VERSION;

pub const DEFAULT_SEED: u64 = 20_240_611;

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "geometry reference values"),
    (2, "visible arc length vs circle sampling"),
    (3, "nearest-distance CCDF vs simulation"),
    (4, "interference Laplace transform vs PGFL simulation and finite differences"),
    (5, "SIR coverage vs simulation"),
    (6, "SNR coverage vs simulation and SIR/SINR/SNR ordering"),
    (7, "orbit selection diversity"),
    (8, "figure trends"),
    (9, "determinism"),
];

const RE: f64 = 6371.0;
const RH: f64 = 500.0;
const LAMBDA: f64 = 0.005;
const G_I_BAR_DB: f64 = -13.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Replaces every Monte-Carlo trial budget; meant for quick smoke runs.
    pub trials: Option<u64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            trials: None,
        }
    }
}

impl ValidateOptions {
    fn mc(&self, default_trials: u64, stream: u64) -> Result<McConfig, CliError> {
        let seed = self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(stream);
        Ok(McConfig::new(self.trials.unwrap_or(default_trials), seed)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = ">")]
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64, detail: impl Into<String>) -> Self {
        let passed = match relation {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
            Relation::Above => value > bound,
        };
        Self {
            name: name.into(),
            value,
            relation,
            bound,
            passed,
            detail: detail.into(),
        }
    }

    fn at_most(name: impl Into<String>, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self::new(name, value, Relation::AtMost, bound, detail)
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self::new(name, value, Relation::AtLeast, bound, detail)
    }

    fn above(name: impl Into<String>, value: f64, bound: f64, detail: impl Into<String>) -> Self {
        Self::new(name, value, Relation::Above, bound, detail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub schema_version: u32,
    pub seed: u64,
    pub trials_override: Option<u64>,
    pub passed: bool,
    pub criteria: Vec<CriterionReport>,
}

impl ValidationReport {
    pub fn failures(&self) -> usize {
        self.criteria.iter().filter(|c| !c.passed).count()
    }

    pub fn to_json(&self) -> String {
        crate::output::to_json(self)
    }
}

/// Largest entry with its index; NaN counts as infinite.
fn worst(values: impl IntoIterator<Item = f64>) -> (f64, usize) {
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| (if v.is_nan() { f64::INFINITY } else { v }, i))
        .fold((f64::NEG_INFINITY, 0), |acc, (v, i)| if v > acc.0 { (v, i) } else { acc })
}

fn setup(altitude: f64, theta: f64, phi: f64) -> Result<(OrbitGeometry, VisibilityWindow), CliError> {
    let orbit = OrbitGeometry::new(RE, altitude, theta, phi)?;
    let window = VisibilityWindow::for_orbit(&orbit, 10f64.to_radians())?;
    Ok((orbit, window))
}

fn channel(alpha: f64, m: f64) -> Result<ChannelParams, CliError> {
    Ok(ChannelParams::new(alpha, m, db_to_linear(G_I_BAR_DB))?)
}

fn gamma_grid() -> Vec<f64> {
    (-2..=6).map(|k| 5.0 * k as f64).collect()
}

fn fig4_thetas() -> [(f64, &'static str); 5] {
    [
        (FRAC_PI_2, "π/2"),
        (FRAC_PI_2 + PI / 36.0, "π/2+π/36"),
        (FRAC_PI_2 - PI / 36.0, "π/2-π/36"),
        (FRAC_PI_2 + PI / 18.0, "π/2+π/18"),
        (FRAC_PI_2 - PI / 18.0, "π/2-π/18"),
    ]
}

fn curve_gap(name: &str, analytic: &CoverageCurve, mc: &CoverageCurve, bound: f64) -> Check {
    let (gap, i) = worst(analytic.values.iter().zip(&mc.values).map(|(a, b)| (a - b).abs()));
    Check::at_most(
        name,
        gap,
        bound,
        format!(
            "worst at γ = {} dB: analytic {} vs MC {}",
            analytic.thresholds_db[i], analytic.values[i], mc.values[i]
        ),
    )
}

/// Pointwise `upper[i] − lower[i] ≥ −slack` over a grid.
fn ordering(name: &str, axis: &str, grid: &[f64], upper: &[f64], lower: &[f64], slack: f64) -> Check {
    let (neg, i) = worst(upper.iter().zip(lower).map(|(u, l)| l - u));
    Check::at_least(
        name,
        0.0 - neg,
        0.0 - slack,
        format!("smallest margin at {axis} = {}: {} vs {}", grid[i], upper[i], lower[i]),
    )
}

fn criterion_1() -> Result<Vec<Check>, CliError> {
    let (orbit, window) = setup(RH, FRAC_PI_2, 0.0)?;
    let earth = EarthConstants::default();
    let l_m = visible_arc_length(&orbit, &window) * 1e3;
    let v = orbital_speed(&orbit, &earth);
    let tau = visible_time(&orbit, &window, &earth);
    Ok(vec![
        Check::at_most("visible arc length (m)", (l_m - 3.3714e6).abs(), 1e2, format!("L = {l_m} m")),
        Check::at_most("orbital speed (m/s)", (v - 7.6165e3).abs(), 0.5, format!("v = {v} m/s")),
        Check::at_most("visible time (s)", (tau - 442.6396).abs(), 0.01, format!("τ = {tau} s")),
    ])
}

/// Arc length by counting equally spaced points of the orbit circle that
/// clear the elevation mask. Builds its own orbit basis from the plane normal.
pub fn circle_sampling_arc(
    earth_radius: f64,
    altitude: f64,
    theta: f64,
    phi: f64,
    omega_min: f64,
    points: usize,
    phase: f64,
) -> f64 {
    let radius = earth_radius + altitude;
    let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
    let seed = if n[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let dot = seed[0] * n[0] + seed[1] * n[1] + seed[2] * n[2];
    let mut u = [seed[0] - dot * n[0], seed[1] - dot * n[1], seed[2] - dot * n[2]];
    let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    u.iter_mut().for_each(|x| *x /= norm);
    let w = [
        n[1] * u[2] - n[2] * u[1],
        n[2] * u[0] - n[0] * u[2],
        n[0] * u[1] - n[1] * u[0],
    ];
    let sin_min = omega_min.sin();
    let step = 2.0 * PI / points as f64;
    let mut hits = 0usize;
    for k in 0..points {
        let (s, c) = ((k as f64 + phase) * step).sin_cos();
        let x = radius * (c * u[0] + s * w[0]);
        let y = radius * (c * u[1] + s * w[1]);
        let dz = radius * (c * u[2] + s * w[2]) - earth_radius;
        let d = (x * x + y * y + dz * dz).sqrt();
        if dz >= d * sin_min {
            hits += 1;
        }
    }
    hits as f64 / points as f64 * 2.0 * PI * radius
}

fn criterion_2(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let mut rng = RandomSource::new(opts.seed).derive(2);
    let cases: Vec<(f64, f64, f64, f64)> = (0..20)
        .map(|_| {
            let altitude = [500.0, 1000.0, 1500.0][(rng.uniform() * 3.0) as usize % 3];
            let omega = (60.0 * rng.uniform()).to_radians();
            let window = VisibilityWindow::new(RE, altitude, omega).expect("valid window");
            // Half-width of the θ band whose orbits reach above the cap plane,
            // kept 10 % away from the edge where L → 0.
            let half = FRAC_PI_2 - (window.r_a() / (RE + altitude)).asin();
            let theta = FRAC_PI_2 + 0.9 * half * (2.0 * rng.uniform() - 1.0);
            let phi = 2.0 * PI * rng.uniform();
            (altitude, theta, phi, omega)
        })
        .collect();
    let errors = cases
        .par_iter()
        .map(|&(altitude, theta, phi, omega)| -> Result<(f64, f64, f64), CliError> {
            let orbit = OrbitGeometry::new(RE, altitude, theta, phi)?;
            let window = VisibilityWindow::for_orbit(&orbit, omega)?;
            let exact = visible_arc_length(&orbit, &window);
            let oracle = circle_sampling_arc(RE, altitude, theta, phi, omega, 10_000_000, 0.5);
            Ok(((exact - oracle).abs() / oracle, exact, oracle))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let (rel, i) = worst(errors.iter().map(|e| e.0));
    let (altitude, theta, _, omega) = cases[i];
    Ok(vec![Check::at_most(
        "relative error, 20 random (θ, ω_min) pairs",
        rel,
        5e-4,
        format!(
            "worst at R_h = {altitude} km, θ = {:.4}°, ω_min = {:.4}°: {} vs {} km",
            theta.to_degrees(),
            omega.to_degrees(),
            errors[i].1,
            errors[i].2
        ),
    )])
}

fn criterion_3(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let mut cases = Vec::new();
    for (theta, label) in fig4_thetas() {
        for lambda in [0.01, 0.001, 0.0001] {
            cases.push((theta, label, lambda));
        }
    }
    let mut checks = Vec::new();
    for (k, (theta, label, lambda)) in cases.into_iter().enumerate() {
        let (orbit, window) = setup(RH, theta, 0.0)?;
        let law = NearestDistanceLaw::new(orbit, window, lambda)?;
        let grid: Vec<f64> = (0..=200)
            .map(|j| law.d_min() + (law.d_max() - law.d_min()) * j as f64 / 200.0)
            .collect();
        let cfg = opts.mc(1_000_000, 300 + k as u64)?;
        let emp = empirical_nearest_ccdf(&orbit, &window, lambda, &grid, &cfg)?;
        let (sup, i) = worst(grid.iter().zip(&emp).map(|(r, e)| (law.ccdf(*r) - e).abs()));
        checks.push(Check::at_most(
            format!("sup |CCDF − empirical|, θ = {label}, λ = {lambda}"),
            sup,
            0.004,
            format!("worst at r = {} km", grid[i]),
        ));
    }
    Ok(checks)
}

fn tight_quadrature() -> Result<QuadratureSpec, CliError> {
    Ok(QuadratureSpec::new(1e-13, 1e-300, 2000)?)
}

fn criterion_4(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let (orbit, window) = setup(RH, FRAC_PI_2, 0.0)?;
    let ch = channel(2.0, 1.0)?;
    let mid = 0.5 * (orbit.d_min() + window.d_max());
    let mut checks = Vec::new();

    // With r in km the interference power is around 1e-6, so the listed s
    // values give ℒ ≈ 1. The second set scales s by rᵅ, the range that
    // coverage actually probes.
    for (k, (r, r_label)) in [(orbit.d_min(), "d_min"), (mid, "midpoint")].into_iter().enumerate() {
        let literal = [0.1, 1.0, 10.0];
        let scaled: Vec<f64> = literal.iter().map(|s| s * r * r).collect();
        let s_values: Vec<f64> = literal.iter().chain(&scaled).copied().collect();
        let cfg = opts.mc(1_000_000, 400 + k as u64)?;
        let est = empirical_laplace(&orbit, &window, LAMBDA, &ch, r, &s_values, &cfg)?;
        let errs = s_values
            .iter()
            .zip(&est)
            .map(|(&s, e)| Ok((log_laplace(&orbit, &window, LAMBDA, &ch, r, s)?.exp() - e.mean).abs()))
            .collect::<Result<Vec<f64>, CliError>>()?;
        let (lit, i) = worst(errs[..3].iter().copied());
        checks.push(Check::at_most(
            format!("|ℒ(s) − PGFL MC|, s ∈ {{0.1, 1, 10}}, r = {r_label}"),
            lit,
            0.005,
            format!("worst at s = {}", literal[i]),
        ));
        let (nat, i) = worst(errs[3..].iter().copied());
        checks.push(Check::at_most(
            format!("|ℒ(s) − PGFL MC|, s ∈ {{0.1, 1, 10}}·r², r = {r_label}"),
            nat,
            0.005,
            format!("worst at s = {}·r²", literal[i]),
        ));
    }

    let quad = tight_quadrature()?;
    let mut first = Vec::new();
    let mut third = Vec::new();
    for m in [1.0, 2.0, 3.0] {
        let ch = channel(2.0, m)?;
        for r in [orbit.d_min(), mid] {
            for gamma in [0.1, 1.0, 10.0] {
                let s = m * gamma * r * r;
                let d = laplace_derivatives_with(&orbit, &window, LAMBDA, &ch, r, s, 3, &quad)?;
                let f = |x: f64| -> Result<f64, CliError> {
                    Ok(log_laplace_with(&orbit, &window, LAMBDA, &ch, r, x, &quad)?.exp())
                };
                let h = 1e-4 * s;
                let d1 = (f(s + h)? - f(s - h)?) / (2.0 * h);
                first.push((((d[1] - d1) / d1).abs(), m, r, gamma));
                let h = 0.02 * s;
                let d3 = (-f(s + 3.0 * h)? + 8.0 * f(s + 2.0 * h)? - 13.0 * f(s + h)?
                    + 13.0 * f(s - h)?
                    - 8.0 * f(s - 2.0 * h)?
                    + f(s - 3.0 * h)?)
                    / (8.0 * h * h * h);
                third.push((((d[3] - d3) / d3).abs(), m, r, gamma));
            }
        }
    }
    for (name, rows, bound) in [("order-1 derivative relative error", &first, 1e-4), ("order-3 derivative relative error", &third, 1e-3)] {
        let (err, i) = worst(rows.iter().map(|x| x.0));
        let (_, m, r, gamma) = rows[i];
        checks.push(Check::at_most(
            name,
            err,
            bound,
            format!("worst at m = {m}, r = {r} km, s = m·{gamma}·r²"),
        ));
    }
    Ok(checks)
}

fn criterion_5(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let (orbit, window) = setup(RH, FRAC_PI_2, 0.0)?;
    let grid = gamma_grid();
    let mut checks = Vec::new();
    for (k, (alpha, m)) in [(2.0, 1.0), (3.0, 1.0), (4.0, 1.0), (2.0, 2.0), (2.0, 3.0)].into_iter().enumerate() {
        let ch = channel(alpha, m)?;
        let analytic = sir_curve(&orbit, &window, LAMBDA, &ch, &grid, true)?;
        let mc = empirical_sir_coverage(&orbit, &window, LAMBDA, &ch, &grid, &opts.mc(100_000, 500 + k as u64)?)?;
        checks.push(curve_gap(&format!("conditional SIR, α = {alpha}, m = {m}"), &analytic, &mc.conditional, 0.015));
    }
    Ok(checks)
}

fn fig10_budget(bandwidth_hz: f64) -> Result<LinkBudget, CliError> {
    Ok(LinkBudget::new(40.0, 30.0, -174.0, 11.0, bandwidth_hz)?)
}

fn criterion_6(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let (orbit, window) = setup(RH, FRAC_PI_2, 0.0)?;
    let ch = channel(2.0, 1.0)?;
    let grid = gamma_grid();
    // One seed for all bandwidths, so the three runs share their draws and
    // only the noise level changes.
    let cfg = opts.mc(100_000, 600)?;
    let mut checks = Vec::new();
    let mut gaps = Vec::new();
    for bw in [1e7, 1e8, 1e9] {
        let mhz = bw / 1e6;
        let budget = fig10_budget(bw)?;
        let analytic = snr_curve(&orbit, &window, LAMBDA, &ch, &budget, &grid, true)?;
        let mc = empirical_snr_sinr_coverage(&orbit, &window, LAMBDA, &ch, &budget, &grid, &cfg)?;
        checks.push(curve_gap(&format!("conditional SNR, BW = {mhz} MHz"), &analytic, &mc.snr.conditional, 0.015));
        let sir = &mc.sir.conditional.values;
        let sinr = &mc.sinr.conditional.values;
        let snr = &mc.snr.conditional.values;
        checks.push(ordering(&format!("SIR ≥ SINR, BW = {mhz} MHz"), "γ (dB)", &grid, sir, sinr, 0.0));
        checks.push(ordering(&format!("SNR ≥ SINR, BW = {mhz} MHz"), "γ (dB)", &grid, snr, sinr, 0.0));
        gaps.push(sir.iter().zip(sinr).map(|(a, b)| a - b).collect::<Vec<_>>());
    }
    checks.push(ordering("SIR − SINR gap: 100 MHz ≥ 10 MHz", "γ (dB)", &grid, &gaps[1], &gaps[0], 0.0));
    checks.push(ordering("SIR − SINR gap: 1000 MHz ≥ 100 MHz", "γ (dB)", &grid, &gaps[2], &gaps[1], 0.0));
    Ok(checks)
}

fn constellation(n: usize, theta: f64) -> Result<ConstellationSpec, CliError> {
    let orbits = (0..n)
        .map(|k| Ok((OrbitGeometry::new(RE, RH, theta, 2.0 * PI * k as f64 / n as f64)?, LAMBDA)))
        .collect::<Result<Vec<_>, CliError>>()?;
    let window = VisibilityWindow::for_orbit(&orbits[0].0, 10f64.to_radians())?;
    Ok(ConstellationSpec::new(orbits, window, channel(2.0, 1.0)?)?)
}

fn criterion_7(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let grid = gamma_grid();
    let mut checks = Vec::new();

    let one = constellation(1, FRAC_PI_2)?;
    let (orbit, lambda) = one.orbits()[0];
    for conditional in [true, false] {
        let multi = max_sir_curve(&one, &grid, conditional)?;
        let single = sir_curve(&orbit, one.window(), lambda, one.channel(), &grid, conditional)?;
        let label = if conditional { "conditional" } else { "unconditional" };
        checks.push(curve_gap(&format!("N = 1 max-SIR vs single-orbit SIR, {label}"), &multi, &single, 1e-12));
    }

    let mut previous = max_sir_curve(&one, &grid, true)?;
    for n in 2..=4 {
        let spec = constellation(n, FRAC_PI_2)?;
        let analytic = max_sir_curve(&spec, &grid, true)?;
        let mc = empirical_max_sir_coverage(&spec, &grid, &opts.mc(100_000, 700 + n as u64)?)?;
        checks.push(curve_gap(&format!("conditional max-SIR vs MC, N = {n}"), &analytic, &mc.all_visible.conditional, 0.015));
        checks.push(ordering(
            &format!("conditional max-SIR non-decreasing, N = {} → {n}", n - 1),
            "γ (dB)",
            &grid,
            &analytic.values,
            &previous.values,
            1e-12,
        ));
        previous = analytic;
    }

    let tilted = constellation(3, FRAC_PI_2 + PI / 18.0)?;
    let g = db_to_linear(10.0);
    let a3 = max_sir_coverage_conditional(&tilted, g)?;
    let a1 = max_sir_coverage_conditional(&one, g)?;
    checks.push(Check::above(
        "N = 3 tilted minus N = 1 zenith at 10 dB, analytic",
        a3 - a1,
        0.0,
        format!("{a3} vs {a1}"),
    ));
    let cfg = opts.mc(100_000, 710)?;
    let m3 = empirical_max_sir_coverage(&tilted, &[10.0], &cfg)?.all_visible.conditional.values[0];
    let m1 = empirical_max_sir_coverage(&one, &[10.0], &cfg)?.all_visible.conditional.values[0];
    checks.push(Check::above(
        "N = 3 tilted minus N = 1 zenith at 10 dB, MC",
        m3 - m1,
        0.0,
        format!("{m3} vs {m1}"),
    ));
    Ok(checks)
}

fn criterion_8() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();
    let grid = gamma_grid();
    let ch = channel(2.0, 1.0)?;

    // Arc length against θ for ω_min ∈ {10°, 20°, 30°}.
    let thetas: Vec<f64> = (0..=180).map(|d| (d as f64).to_radians()).collect();
    let lengths = [10.0f64, 20.0, 30.0]
        .iter()
        .map(|w| {
            thetas
                .iter()
                .map(|&t| {
                    let orbit = OrbitGeometry::new(RE, RH, t, 0.0)?;
                    Ok(visible_arc_length(&orbit, &VisibilityWindow::for_orbit(&orbit, w.to_radians())?))
                })
                .collect::<Result<Vec<f64>, CliError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let degrees: Vec<f64> = (0..=180).map(f64::from).collect();
    checks.push(ordering("arc length: ω_min 10° ≥ 20°", "θ (deg)", &degrees, &lengths[0], &lengths[1], 0.0));
    checks.push(ordering("arc length: ω_min 20° ≥ 30°", "θ (deg)", &degrees, &lengths[1], &lengths[2], 0.0));
    for (w, l) in [10, 20, 30].iter().zip(&lengths) {
        let (peak, i) = worst(l.iter().copied());
        checks.push(Check::at_most(
            format!("arc length peaks at θ = 90°, ω_min = {w}°"),
            (degrees[i] - 90.0).abs(),
            0.0,
            format!("maximum {peak} km at θ = {}°", degrees[i]),
        ));
    }

    // Nearest-distance CCDF dominance in λ and in θ.
    for (theta, label) in fig4_thetas() {
        let (orbit, window) = setup(RH, theta, 0.0)?;
        let laws = [0.0001, 0.001, 0.01]
            .iter()
            .map(|&l| Ok(NearestDistanceLaw::new(orbit, window, l)?))
            .collect::<Result<Vec<_>, CliError>>()?;
        let r: Vec<f64> = (0..=200)
            .map(|k| laws[0].d_min() + (laws[0].d_max() - laws[0].d_min()) * k as f64 / 200.0)
            .collect();
        let ccdf = |i: usize| r.iter().map(|&x| laws[i].ccdf(x)).collect::<Vec<_>>();
        checks.push(ordering(&format!("CCDF λ = 0.0001 ≥ λ = 0.001, θ = {label}"), "r (km)", &r, &ccdf(0), &ccdf(1), 0.0));
        checks.push(ordering(&format!("CCDF λ = 0.001 ≥ λ = 0.01, θ = {label}"), "r (km)", &r, &ccdf(1), &ccdf(2), 0.0));
    }
    for lambda in [0.01, 0.001, 0.0001] {
        let (zo, zw) = setup(RH, FRAC_PI_2, 0.0)?;
        let zenith = NearestDistanceLaw::new(zo, zw, lambda)?;
        for tilt in [PI / 18.0, -PI / 18.0] {
            let (to, tw) = setup(RH, FRAC_PI_2 + tilt, 0.0)?;
            let tilted = NearestDistanceLaw::new(to, tw, lambda)?;
            let r: Vec<f64> = (1..=200)
                .map(|k| tilted.d_min() + (tilted.d_max() - tilted.d_min()) * k as f64 / 201.0)
                .collect();
            let z: Vec<f64> = r.iter().map(|&x| zenith.ccdf(x)).collect();
            let t: Vec<f64> = r.iter().map(|&x| tilted.ccdf(x)).collect();
            let sign = if tilt > 0.0 { "+" } else { "-" };
            checks.push(ordering(&format!("CCDF θ = π/2{sign}π/18 ≥ θ = π/2, λ = {lambda}"), "r (km)", &r, &t, &z, 0.0));
        }
    }

    let at = |orbit: &OrbitGeometry, window: &VisibilityWindow, lambda: f64, ch: &ChannelParams, db: f64| {
        orbitcov_core::sir_coverage(orbit, window, lambda, ch, db_to_linear(db))
    };
    let (orbit, window) = setup(RH, FRAC_PI_2, 0.0)?;

    // Path-loss exponent at 10 dB.
    let by_alpha = [2.0, 3.0, 4.0]
        .iter()
        .map(|&a| Ok(at(&orbit, &window, LAMBDA, &channel(a, 1.0)?, 10.0)?))
        .collect::<Result<Vec<f64>, CliError>>()?;
    checks.push(Check::above("coverage at 10 dB: α = 3 minus α = 2", by_alpha[1] - by_alpha[0], 0.0, format!("{by_alpha:?}")));
    checks.push(Check::above("coverage at 10 dB: α = 4 minus α = 3", by_alpha[2] - by_alpha[1], 0.0, format!("{by_alpha:?}")));

    // Density at 10 dB.
    let sparse = at(&orbit, &window, 0.001, &ch, 10.0)?;
    let dense = at(&orbit, &window, 0.01, &ch, 10.0)?;
    checks.push(Check::above("coverage at 10 dB: λ = 0.001 minus λ = 0.01", sparse - dense, 0.0, format!("{sparse} vs {dense}")));

    // Altitude, pointwise.
    let by_altitude = [500.0, 1000.0, 1500.0]
        .iter()
        .map(|&h| {
            let (o, w) = setup(h, FRAC_PI_2, 0.0)?;
            Ok(sir_curve(&o, &w, LAMBDA, &ch, &grid, false)?.values)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    checks.push(ordering("coverage: R_h 500 ≥ 1000 km", "γ (dB)", &grid, &by_altitude[0], &by_altitude[1], 0.0));
    checks.push(ordering("coverage: R_h 1000 ≥ 1500 km", "γ (dB)", &grid, &by_altitude[1], &by_altitude[2], 0.0));

    // Orbit tilt, pointwise.
    let zenith = sir_curve(&orbit, &window, LAMBDA, &ch, &grid, false)?.values;
    for (tilt, label) in [(PI / 18.0, "π/2+π/18"), (-PI / 18.0, "π/2-π/18")] {
        let (o, w) = setup(RH, FRAC_PI_2 + tilt, 0.0)?;
        let tilted = sir_curve(&o, &w, LAMBDA, &ch, &grid, false)?.values;
        checks.push(ordering(&format!("coverage: θ = π/2 ≥ θ = {label}"), "γ (dB)", &grid, &zenith, &tilted, 0.0));
    }
    Ok(checks)
}

/// Re-runs simulations under different thread counts and compares the
/// results bit for bit.
fn criterion_9(opts: &ValidateOptions) -> Result<Vec<Check>, CliError> {
    let (orbit, window) = setup(RH, FRAC_PI_2, 0.0)?;
    let ch = channel(2.0, 3.0)?;
    let grid = gamma_grid();
    let cfg = opts.mc(20_000, 900)?;
    let spec = constellation(3, FRAC_PI_2)?;
    let run = |threads: usize| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), CliError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        pool.install(|| {
            let sir = empirical_sir_coverage(&orbit, &window, LAMBDA, &ch, &grid, &cfg)?;
            let max = empirical_max_sir_coverage(&spec, &grid, &cfg)?;
            let analytic = max_sir_curve(&spec, &grid, true)?;
            Ok((sir.conditional.values, max.all_visible.conditional.values, analytic.values))
        })
    };
    let a = run(1)?;
    let b = run(4)?;
    let c = run(4)?;
    let mismatches = |x: &(Vec<f64>, Vec<f64>, Vec<f64>), y: &(Vec<f64>, Vec<f64>, Vec<f64>)| {
        [(&x.0, &y.0), (&x.1, &y.1), (&x.2, &y.2)]
            .iter()
            .map(|(p, q)| p.iter().zip(q.iter()).filter(|(u, v)| u.to_bits() != v.to_bits()).count())
            .sum::<usize>() as f64
    };
    Ok(vec![
        Check::at_most("values differing between 1 and 4 threads", mismatches(&a, &b), 0.0, "same seed"),
        Check::at_most("values differing between repeated runs", mismatches(&b, &c), 0.0, "same seed"),
    ])
}

/// Runs one criterion by number.
pub fn run_criterion(id: u8, opts: &ValidateOptions) -> Result<CriterionReport, CliError> {
    let checks = match id {
        1 => criterion_1()?,
        2 => criterion_2(opts)?,
        3 => criterion_3(opts)?,
        4 => criterion_4(opts)?,
        5 => criterion_5(opts)?,
        6 => criterion_6(opts)?,
        7 => criterion_7(opts)?,
        8 => criterion_8()?,
        9 => criterion_9(opts)?,
        _ => return Err(CliError::Config(format!("no acceptance criterion {id}"))),
    };
    let title = CRITERIA[id as usize - 1].1.to_string();
    Ok(CriterionReport {
        id,
        title,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn run_all(opts: &ValidateOptions) -> Result<ValidationReport, CliError> {
    let criteria = CRITERIA
        .iter()
        .map(|(id, _)| run_criterion(*id, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ValidationReport {
        schema_version: SCHEMA_VERSION,
        seed: opts.seed,
        trials_override: opts.trials,
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    })
}

/// One line per criterion, as printed by the CLI.
pub fn summary_lines(report: &ValidationReport) -> Vec<String> {
    report
        .criteria
        .iter()
        .map(|c| {
            let failed: Vec<&str> = c.checks.iter().filter(|k| !k.passed).map(|k| k.name.as_str()).collect();
            let status = if c.passed { "PASS" } else { "FAIL" };
            if failed.is_empty() {
                format!("{status} criterion {}: {}", c.id, c.title)
            } else {
                format!("{status} criterion {}: {} (failed: {})", c.id, c.title, failed.join("; "))
            }
        })
        .collect()
}
