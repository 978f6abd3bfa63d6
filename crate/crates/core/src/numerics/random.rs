//! Seeded random streams and the samplers built on them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};

/// A deterministic random stream.
///
/// The same `(seed, stream)` pair always yields the same sequence. Parallel
/// workers must each own a source obtained from [`RandomSource::derive`];
/// a single source is never shared between threads.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    /// Independent child stream number `index` of this seed.
    pub fn derive(&self, index: u64) -> Self {
        // Stream 0 is the parent; children are mixed away from it.
        let stream = splitmix64(self.stream ^ splitmix64(index.wrapping_add(1)));
        Self::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        Self::ALGORITHM
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RandomSource {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Poisson count with the given mean.
pub fn sample_poisson(mean: f64, rng: &mut RandomSource) -> Result<u64> {
    Ok(PoissonCount::new(mean)?.sample(rng))
}

/// Nakagami-m envelope `H` with `E[H²] = 1`, drawn as `√G` for
/// `G ~ Gamma(m, 1/m)`.
pub fn sample_nakagami(m: f64, rng: &mut RandomSource) -> Result<f64> {
    Ok(FadingPower::new(m)?.sample(rng).sqrt())
}

/// Exponential with rate `rate` truncated to `[0, length]`, by inversion.
pub fn sample_truncated_exponential(rate: f64, length: f64, rng: &mut RandomSource) -> f64 {
    truncated_exponential_quantile(rate, length, rng.uniform())
}

/// Quantile of the exponential law with rate `rate` truncated to `[0, length]`.
pub(crate) fn truncated_exponential_quantile(rate: f64, length: f64, u: f64) -> f64 {
    if rate * length == 0.0 {
        return u * length;
    }
    let t = -(u * (-rate * length).exp_m1()).ln_1p() / rate;
    t.clamp(0.0, length)
}

/// Cached Poisson sampler that also accepts a zero mean.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PoissonCount(Option<Poisson<f64>>);

impl PoissonCount {
    pub(crate) fn new(mean: f64) -> Result<Self> {
        if !(mean >= 0.0 && mean.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Poisson mean must be finite and non-negative, got {mean}"
            )));
        }
        if mean == 0.0 {
            return Ok(Self(None));
        }
        Poisson::new(mean)
            .map(|p| Self(Some(p)))
            .map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.0 {
            None => 0,
            Some(p) => p.sample(rng) as u64,
        }
    }
}

/// Cached sampler of the fading power `H² ~ Gamma(m, 1/m)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FadingPower(Gamma<f64>);

impl FadingPower {
    pub(crate) fn new(m: f64) -> Result<Self> {
        if !(m >= 0.5 && m.is_finite()) {
            return Err(Error::Domain(format!("Nakagami shape must be ≥ 0.5, got {m}")));
        }
        Gamma::new(m, 1.0 / m)
            .map(Self)
            .map_err(|e| Error::Domain(format!("Gamma({m}, 1/{m}): {e}")))
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.0.sample(rng)
    }
}
