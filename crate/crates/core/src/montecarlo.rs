//! Monte-Carlo constellation simulator.
//!
//! Each orbit is a Poisson process of satellites placed angle-uniformly on a
//! circle of radius `R` in 3-D. Visibility is decided per satellite from its
//! elevation angle at the user `u = (0, 0, R_E)`. Fading powers are
//! Gamma(m, 1/m), so the shape may be any real `m ≥ 0.5` here.
//!
//! A trial whose serving satellite has no interferer has `SIR = +∞` and counts
//! as covered at every finite threshold.
//!
//! Trials run in shards of [`McConfig::batch`]. Shard `k` draws from
//! `RandomSource::new(seed).derive(k)` and shard results are merged in shard
//! order, so a configuration always produces the same numbers whatever the
//! thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coverage::{ConstellationSpec, CoverageCurve, CurveKind, CurveMetadata, LinkBudget};
use crate::db_to_linear;
use crate::error::{Error, Result};
use crate::geometry::{OrbitGeometry, VisibilityWindow};
use crate::interference::ChannelParams;
use crate::numerics::{FadingPower, PoissonCount, RandomSource};

/// Minimum number of trials that must satisfy a conditioning event.
pub const MIN_CONDITIONING_TRIALS: u64 = 100;

/// Two-sided 95 % normal quantile used for Wilson intervals.
pub const WILSON_Z: f64 = 1.959964;

/// Trial budget and seed of a simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    /// Trials per shard; the last shard may be partial.
    pub batch: u64,
}

impl McConfig {
    pub const DEFAULT_BATCH: u64 = 10_000;

    pub fn new(trials: u64, seed: u64) -> Result<Self> {
        Self::with_batch(trials, seed, Self::DEFAULT_BATCH)
    }

    pub fn with_batch(trials: u64, seed: u64, batch: u64) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if batch == 0 {
            return Err(Error::InvalidParameter("batch must be at least 1".into()));
        }
        Ok(Self {
            trials,
            seed,
            batch,
        })
    }

    fn shards(&self) -> Vec<(u64, u64)> {
        let full = self.trials / self.batch;
        let rest = self.trials % self.batch;
        let mut out: Vec<(u64, u64)> = (0..full).map(|k| (k, self.batch)).collect();
        if rest > 0 {
            out.push((full, rest));
        }
        out
    }
}

/// One draw of the satellites of a single orbit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SatelliteSnapshot {
    /// Positions (km), in the same order as `distances`.
    pub positions: Vec<[f64; 3]>,
    /// User-to-satellite distances (km), ascending.
    pub distances: Vec<f64>,
    /// Whether each satellite is above the minimum elevation.
    pub visible: Vec<bool>,
}

impl SatelliteSnapshot {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn visible_count(&self) -> usize {
        self.visible.iter().filter(|v| **v).count()
    }

    /// Distance to the nearest visible satellite.
    pub fn nearest_visible(&self) -> Option<f64> {
        self.distances
            .iter()
            .zip(&self.visible)
            .find(|(_, v)| **v)
            .map(|(d, _)| *d)
    }
}

/// Orthonormal basis of an orbit plane. `e1` points at the orbit's highest
/// point above the user's horizon, `e2` completes the basis.
#[derive(Debug, Clone, Copy)]
struct OrbitFrame {
    e1: [f64; 3],
    e2: [f64; 3],
    radius: f64,
}

impl OrbitFrame {
    fn new(orbit: &OrbitGeometry) -> Self {
        let (st, ct) = orbit.theta().sin_cos();
        let (sp, cp) = orbit.phi().sin_cos();
        Self {
            e1: [-ct * cp, -ct * sp, st],
            e2: [-sp, cp, 0.0],
            radius: orbit.radius(),
        }
    }

    fn point(&self, psi: f64) -> [f64; 3] {
        let (s, c) = psi.sin_cos();
        let r = self.radius;
        [
            r * (c * self.e1[0] + s * self.e2[0]),
            r * (c * self.e1[1] + s * self.e2[1]),
            r * (c * self.e1[2] + s * self.e2[2]),
        ]
    }
}

/// Distance from the user and elevation test for a satellite at `p`.
fn observe(p: &[f64; 3], earth_radius: f64, sin_min: f64) -> (f64, bool) {
    let dz = p[2] - earth_radius;
    let d = (p[0] * p[0] + p[1] * p[1] + dz * dz).sqrt();
    (d, dz >= d * sin_min)
}

/// Draws a full orbit: `M ~ Poisson(2πRλ)` satellites placed uniformly.
pub fn sample_orbit(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    rng: &mut RandomSource,
) -> Result<SatelliteSnapshot> {
    window.check(orbit)?;
    let frame = OrbitFrame::new(orbit);
    let count = PoissonCount::new(2.0 * std::f64::consts::PI * orbit.radius() * lambda)?;
    let sin_min = window.omega_min().sin();
    let n = count.sample(rng) as usize;
    let mut sats: Vec<([f64; 3], f64, bool)> = (0..n)
        .map(|_| {
            let p = frame.point(std::f64::consts::TAU * rng.uniform());
            let (d, vis) = observe(&p, orbit.earth_radius(), sin_min);
            (p, d, vis)
        })
        .collect();
    sats.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(SatelliteSnapshot {
        positions: sats.iter().map(|s| s.0).collect(),
        distances: sats.iter().map(|s| s.1).collect(),
        visible: sats.iter().map(|s| s.2).collect(),
    })
}

/// Samples only the sector of the orbit above the user's horizon plane
/// (`z ≥ R_E`), which contains every satellite that can be visible. Points
/// outside it are never drawn; inside it the process is the same Poisson
/// process restricted to the sector, so visible satellites have the same law
/// as with [`sample_orbit`].
#[derive(Debug, Clone, Copy)]
struct HorizonSampler {
    frame: OrbitFrame,
    earth_radius: f64,
    sin_min: f64,
    half_angle: f64,
    count: PoissonCount,
}

impl HorizonSampler {
    fn new(orbit: &OrbitGeometry, window: &VisibilityWindow, lambda: f64) -> Result<Self> {
        window.check(orbit)?;
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "satellite density must be non-negative, got {lambda}"
            )));
        }
        let frame = OrbitFrame::new(orbit);
        // z = R sin θ cos ψ ≤ R cos ψ, so z ≥ R_E needs cos ψ ≥ R_E / R.
        let half_angle = (orbit.earth_radius() / orbit.radius()).acos();
        Ok(Self {
            frame,
            earth_radius: orbit.earth_radius(),
            sin_min: window.omega_min().sin(),
            half_angle,
            count: PoissonCount::new(2.0 * half_angle * orbit.radius() * lambda)?,
        })
    }

    /// Appends the distances of the visible satellites of one draw.
    fn visible_into(&self, rng: &mut RandomSource, out: &mut Vec<f64>) {
        let n = self.count.sample(rng);
        for _ in 0..n {
            let psi = self.half_angle * (2.0 * rng.uniform() - 1.0);
            let p = self.frame.point(psi);
            let (d, vis) = observe(&p, self.earth_radius, self.sin_min);
            if vis {
                out.push(d);
            }
        }
    }
}

/// Wilson score interval for `successes` out of `n` at 95 % confidence.
pub fn wilson_interval(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = successes as f64 / n_f;
    let z2 = WILSON_Z * WILSON_Z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = WILSON_Z * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn estimate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        wilson_interval(self.successes, self.trials)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

fn run_shards<A, F>(cfg: &McConfig, work: F) -> Result<Vec<A>>
where
    A: Send,
    F: Fn(&mut RandomSource, u64) -> Result<A> + Sync,
{
    let root = RandomSource::new(cfg.seed);
    cfg.shards()
        .into_par_iter()
        .map(|(k, n)| {
            let mut rng = root.derive(k);
            work(&mut rng, n)
        })
        .collect()
}

/// Counters of one family of threshold tests.
#[derive(Debug, Clone, Default)]
struct Tally {
    conditioned: u64,
    hits: Vec<u64>,
}

impl Tally {
    fn new(points: usize) -> Self {
        Self {
            conditioned: 0,
            hits: vec![0; points],
        }
    }

    fn merge(&mut self, other: &Tally) {
        self.conditioned += other.conditioned;
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
    }
}

fn require_conditioning(survivors: u64) -> Result<()> {
    if survivors < MIN_CONDITIONING_TRIALS {
        Err(Error::Degenerate {
            survivors,
            required: MIN_CONDITIONING_TRIALS,
        })
    } else {
        Ok(())
    }
}

fn mc_curve(
    kind: CurveKind,
    thresholds_db: &[f64],
    hits: &[u64],
    denominator: u64,
    conditional: bool,
    cfg: &McConfig,
    conditioning_trials: u64,
) -> CoverageCurve {
    CoverageCurve {
        kind,
        thresholds_db: thresholds_db.to_vec(),
        values: hits.iter().map(|&h| h as f64 / denominator as f64).collect(),
        intervals: Some(hits.iter().map(|&h| wilson_interval(h, denominator)).collect()),
        metadata: CurveMetadata {
            conditional,
            trials: Some(cfg.trials),
            conditioning_trials: Some(conditioning_trials),
            seed: Some(cfg.seed),
            distance_unit: None,
        },
    }
}

/// Conditional and unconditional versions of one empirical curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePair {
    /// Given at least one visible satellite (all orbits for max-SIR).
    pub conditional: CoverageCurve,
    /// Over all trials, i.e. the conditional curve times the empirical
    /// probability of the conditioning event.
    pub unconditional: CoverageCurve,
}

fn curve_pair(
    kind: CurveKind,
    thresholds_db: &[f64],
    tally: &Tally,
    cfg: &McConfig,
) -> Result<CurvePair> {
    require_conditioning(tally.conditioned)?;
    Ok(CurvePair {
        conditional: mc_curve(
            kind,
            thresholds_db,
            &tally.hits,
            tally.conditioned,
            true,
            cfg,
            tally.conditioned,
        ),
        unconditional: mc_curve(
            kind,
            thresholds_db,
            &tally.hits,
            cfg.trials,
            false,
            cfg,
            tally.conditioned,
        ),
    })
}

fn linear_thresholds(thresholds_db: &[f64]) -> Result<Vec<f64>> {
    thresholds_db
        .iter()
        .map(|&db| {
            if db.is_finite() {
                Ok(db_to_linear(db))
            } else {
                Err(Error::InvalidParameter(format!("threshold must be finite, got {db} dB")))
            }
        })
        .collect()
}

/// Fraction of trials with at least one visible satellite.
pub fn empirical_visibility(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    cfg: &McConfig,
) -> Result<Proportion> {
    let sampler = HorizonSampler::new(orbit, window, lambda)?;
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let mut hits = 0u64;
        for _ in 0..n {
            buf.clear();
            sampler.visible_into(rng, &mut buf);
            hits += u64::from(!buf.is_empty());
        }
        Ok(hits)
    })?;
    Ok(Proportion {
        successes: shards.iter().sum(),
        trials: cfg.trials,
    })
}

/// Mean number of visible satellites per trial.
pub fn empirical_visible_count(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    cfg: &McConfig,
) -> Result<MeanEstimate> {
    let sampler = HorizonSampler::new(orbit, window, lambda)?;
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            buf.clear();
            sampler.visible_into(rng, &mut buf);
            let k = buf.len() as f64;
            s += k;
            s2 += k * k;
        }
        Ok((s, s2))
    })?;
    Ok(mean_estimate(&shards, cfg.trials))
}

fn mean_estimate(shards: &[(f64, f64)], n: u64) -> MeanEstimate {
    let (s, s2) = shards
        .iter()
        .fold((0.0, 0.0), |acc, x| (acc.0 + x.0, acc.1 + x.1));
    let n = n as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    MeanEstimate {
        mean,
        std_error: (var / n).sqrt(),
    }
}

/// Empirical `P[D > r | at least one visible]` at each `r` of `grid`.
pub fn empirical_nearest_ccdf(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    grid: &[f64],
    cfg: &McConfig,
) -> Result<Vec<f64>> {
    let sampler = HorizonSampler::new(orbit, window, lambda)?;
    // Sorted copy of the grid so each trial touches a prefix.
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| grid[a].total_cmp(&grid[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| grid[i]).collect();
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let mut tally = Tally::new(grid.len());
        for _ in 0..n {
            buf.clear();
            sampler.visible_into(rng, &mut buf);
            let Some(nearest) = buf.iter().copied().reduce(f64::min) else {
                continue;
            };
            tally.conditioned += 1;
            let below = sorted.partition_point(|&r| r < nearest);
            for hit in &mut tally.hits[..below] {
                *hit += 1;
            }
        }
        Ok(tally)
    })?;
    let mut total = Tally::new(grid.len());
    for t in &shards {
        total.merge(t);
    }
    require_conditioning(total.conditioned)?;
    let mut out = vec![0.0; grid.len()];
    for (k, &i) in order.iter().enumerate() {
        out[i] = total.hits[k] as f64 / total.conditioned as f64;
    }
    Ok(out)
}

/// Empirical `E[e^{−sI}]` for the interference from visible satellites farther
/// than `r`, for each `s` in `s_values`.
pub fn empirical_laplace(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    r: f64,
    s_values: &[f64],
    cfg: &McConfig,
) -> Result<Vec<MeanEstimate>> {
    let sampler = HorizonSampler::new(orbit, window, lambda)?;
    let fading = FadingPower::new(ch.m)?;
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let mut acc = vec![(0.0, 0.0); s_values.len()];
        for _ in 0..n {
            buf.clear();
            sampler.visible_into(rng, &mut buf);
            let mut interference = 0.0;
            for &d in buf.iter().filter(|&&d| d > r) {
                interference += ch.g_i_bar * fading.sample(rng) * d.powf(-ch.alpha);
            }
            for (slot, &s) in acc.iter_mut().zip(s_values) {
                let v = (-s * interference).exp();
                slot.0 += v;
                slot.1 += v * v;
            }
        }
        Ok(acc)
    })?;
    Ok((0..s_values.len())
        .map(|i| {
            let per: Vec<(f64, f64)> = shards.iter().map(|s| s[i]).collect();
            mean_estimate(&per, cfg.trials)
        })
        .collect())
}

/// Serving and interference powers on one orbit (unit transmit power, km).
#[derive(Debug, Clone, Copy)]
struct LinkDraw {
    signal: f64,
    interference: f64,
}

/// Serves the nearest visible satellite; fading is drawn for every visible
/// satellite in sampling order.
fn draw_link(
    distances: &[f64],
    ch: &ChannelParams,
    fading: &FadingPower,
    rng: &mut RandomSource,
) -> Option<LinkDraw> {
    let (serving, _) = distances
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, &d) in distances.iter().enumerate() {
        let p = fading.sample(rng) * d.powf(-ch.alpha);
        if i == serving {
            signal = p;
        } else {
            interference += ch.g_i_bar * p;
        }
    }
    Some(LinkDraw {
        signal,
        interference,
    })
}

/// SIR coverage on one orbit. `I = 0` counts as covered.
pub fn empirical_sir_coverage(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    thresholds_db: &[f64],
    cfg: &McConfig,
) -> Result<CurvePair> {
    let gammas = linear_thresholds(thresholds_db)?;
    let sampler = HorizonSampler::new(orbit, window, lambda)?;
    let fading = FadingPower::new(ch.m)?;
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let mut tally = Tally::new(gammas.len());
        for _ in 0..n {
            buf.clear();
            sampler.visible_into(rng, &mut buf);
            let Some(link) = draw_link(&buf, ch, &fading, rng) else {
                continue;
            };
            tally.conditioned += 1;
            for (hit, &g) in tally.hits.iter_mut().zip(&gammas) {
                *hit += u64::from(link.signal >= g * link.interference);
            }
        }
        Ok(tally)
    })?;
    let mut total = Tally::new(gammas.len());
    for t in &shards {
        total.merge(t);
    }
    curve_pair(CurveKind::SirMc, thresholds_db, &total, cfg)
}

/// SIR, SNR and SINR curves from the same draws.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCurves {
    pub sir: CurvePair,
    pub snr: CurvePair,
    pub sinr: CurvePair,
}

/// SIR, SNR and SINR coverage on one orbit. Path loss in the noise-limited
/// expressions uses distances in metres.
pub fn empirical_snr_sinr_coverage(
    orbit: &OrbitGeometry,
    window: &VisibilityWindow,
    lambda: f64,
    ch: &ChannelParams,
    budget: &LinkBudget,
    thresholds_db: &[f64],
    cfg: &McConfig,
) -> Result<LinkCurves> {
    let gammas = linear_thresholds(thresholds_db)?;
    let sampler = HorizonSampler::new(orbit, window, lambda)?;
    let fading = FadingPower::new(ch.m)?;
    // Noise relative to unit path gain, expressed in the km scale of the draws.
    let noise_km = budget.noise_to_signal() * 1e3f64.powf(ch.alpha);
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let mut tallies = [
            Tally::new(gammas.len()),
            Tally::new(gammas.len()),
            Tally::new(gammas.len()),
        ];
        for _ in 0..n {
            buf.clear();
            sampler.visible_into(rng, &mut buf);
            let Some(link) = draw_link(&buf, ch, &fading, rng) else {
                continue;
            };
            let denominators = [link.interference, noise_km, link.interference + noise_km];
            for (tally, den) in tallies.iter_mut().zip(denominators) {
                tally.conditioned += 1;
                for (hit, &g) in tally.hits.iter_mut().zip(&gammas) {
                    *hit += u64::from(link.signal >= g * den);
                }
            }
        }
        Ok(tallies)
    })?;
    let mut total = [
        Tally::new(gammas.len()),
        Tally::new(gammas.len()),
        Tally::new(gammas.len()),
    ];
    for shard in &shards {
        for (t, s) in total.iter_mut().zip(shard) {
            t.merge(s);
        }
    }
    let mut snr = curve_pair(CurveKind::SnrMc, thresholds_db, &total[1], cfg)?;
    let mut sinr = curve_pair(CurveKind::SinrMc, thresholds_db, &total[2], cfg)?;
    for c in [
        &mut snr.conditional,
        &mut snr.unconditional,
        &mut sinr.conditional,
        &mut sinr.unconditional,
    ] {
        c.metadata.distance_unit = Some(LinkBudget::DISTANCE_UNIT.into());
    }
    Ok(LinkCurves {
        sir: curve_pair(CurveKind::SirMc, thresholds_db, &total[0], cfg)?,
        snr,
        sinr,
    })
}

/// Max-SIR curves over several orbits.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxSirCurves {
    /// Conditioned on every orbit having a visible satellite; `unconditional`
    /// multiplies by the fraction of such trials.
    pub all_visible: CurvePair,
    /// Conditioned on at least one orbit having a visible satellite, taking
    /// the maximum over the visible orbits only.
    pub any_visible: CoverageCurve,
}

/// Max-SIR coverage over all orbits of `spec`, simulated independently.
pub fn empirical_max_sir_coverage(
    spec: &ConstellationSpec,
    thresholds_db: &[f64],
    cfg: &McConfig,
) -> Result<MaxSirCurves> {
    let gammas = linear_thresholds(thresholds_db)?;
    let ch = *spec.channel();
    let fading = FadingPower::new(ch.m)?;
    let samplers = spec
        .orbits()
        .iter()
        .map(|(orbit, lambda)| HorizonSampler::new(orbit, spec.window(), *lambda))
        .collect::<Result<Vec<_>>>()?;
    let shards = run_shards(cfg, |rng, n| {
        let mut buf = Vec::new();
        let mut all = Tally::new(gammas.len());
        let mut any = Tally::new(gammas.len());
        let mut links = Vec::with_capacity(samplers.len());
        for _ in 0..n {
            links.clear();
            for sampler in &samplers {
                buf.clear();
                sampler.visible_into(rng, &mut buf);
                links.push(draw_link(&buf, &ch, &fading, rng));
            }
            let visible: Vec<LinkDraw> = links.iter().flatten().copied().collect();
            if visible.is_empty() {
                continue;
            }
            let every = visible.len() == links.len();
            any.conditioned += 1;
            all.conditioned += u64::from(every);
            for (j, &g) in gammas.iter().enumerate() {
                let covered = visible.iter().any(|l| l.signal >= g * l.interference);
                if covered {
                    any.hits[j] += 1;
                    all.hits[j] += u64::from(every);
                }
            }
        }
        Ok((all, any))
    })?;
    let mut all = Tally::new(gammas.len());
    let mut any = Tally::new(gammas.len());
    for (a, b) in &shards {
        all.merge(a);
        any.merge(b);
    }
    require_conditioning(any.conditioned)?;
    Ok(MaxSirCurves {
        all_visible: curve_pair(CurveKind::MaxSirMc, thresholds_db, &all, cfg)?,
        any_visible: mc_curve(
            CurveKind::MaxSirAnyMc,
            thresholds_db,
            &any.hits,
            any.conditioned,
            true,
            cfg,
            any.conditioned,
        ),
    })
}
