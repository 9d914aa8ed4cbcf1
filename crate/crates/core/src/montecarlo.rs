//! Monte Carlo oracles for the link success probability.
//!
//! * The Z-sampler draws the normalised variable `Z` under exactly the
//!   statistical model the analytical transform uses, so its estimate of
//!   `Pr(Z <= 1/theta)` checks the quadrature and inversion end to end.
//! * The spatial simulator drops a receiver and transmitters uniformly in the
//!   disk and evaluates the SINR directly. Distances to the receiver share one
//!   geometry per trial.
//!
//! Trials run in fixed-size batches. Batch `k` uses a ChaCha8 stream `k` of
//! the caller's seed and only integer success counts are reduced, so results
//! do not depend on the number of threads or on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{sample_distance, DiskRegion};
use crate::linkmodel::{InterferenceMode, LinkTier};

/// Trials per independently seeded batch.
pub const BATCH_TRIALS: u64 = 1 << 14;

/// Smallest accepted trial count.
pub const MIN_TRIALS: u64 = 1_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("invalid simulation parameters: {0}")]
    InvalidParams(String),
}

/// Physical parameters the spatial simulator needs on top of a tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialParams {
    /// Per-node transmit power, identical for all nodes of the tier.
    pub tx_power: f64,
    /// Noise power `sigma^2`.
    pub noise_power: f64,
}

impl SpatialParams {
    pub fn new(tx_power: f64, noise_power: f64) -> Result<Self, McError> {
        let p = Self {
            tx_power,
            noise_power,
        };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), McError> {
        if !(self.tx_power.is_finite() && self.tx_power > 0.0) {
            return Err(McError::InvalidParams(format!(
                "tx_power must be positive, got {}",
                self.tx_power
            )));
        }
        if !(self.noise_power.is_finite() && self.noise_power > 0.0) {
            return Err(McError::InvalidParams(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            )));
        }
        Ok(())
    }
}

/// A binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, trials: u64, seed: u64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            estimate: p,
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }
}

/// Runs `trials` trials in seeded batches. `trial` adds its outcome for
/// every threshold to the counter slice.
fn run_batches<F>(trials: u64, seed: u64, thresholds: usize, trial: F) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng, &mut [u64]) + Sync,
{
    let batches = trials.div_ceil(BATCH_TRIALS);
    (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let n = BATCH_TRIALS.min(trials - b * BATCH_TRIALS);
            let mut counts = vec![0u64; thresholds];
            for _ in 0..n {
                trial(&mut rng, &mut counts);
            }
            counts
        })
        .reduce(
            || vec![0u64; thresholds],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        )
}

fn check_trials(trials: u64) -> Result<(), McError> {
    if trials < MIN_TRIALS {
        Err(McError::TooFewTrials(trials))
    } else {
        Ok(())
    }
}

fn check_thresholds(thetas: &[f64]) -> Result<(), McError> {
    match thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        Some(t) => Err(McError::InvalidParams(format!(
            "thresholds must be positive, got {t}"
        ))),
        None => Ok(()),
    }
}

fn fade(tier: &LinkTier) -> Exp<f64> {
    Exp::new(tier.fading_rate).expect("validated fading rate")
}

/// Interference part of `Z` for a given desired fade.
fn interference_sum<R: Rng + ?Sized>(
    tier: &LinkTier,
    h: f64,
    shared_desired: Option<f64>,
    rng: &mut R,
) -> f64 {
    let fade = fade(tier);
    let alpha = tier.path_loss_exp;
    let mut total = 0.0;
    for _ in 0..tier.interferers() {
        let h_m = fade.sample(rng);
        let d = match shared_desired {
            Some(d) => d,
            None => sample_distance(&tier.region, rng).value(),
        };
        let d_m = sample_distance(&tier.region, rng).value();
        total += h_m * (d / d_m).powf(alpha);
    }
    total / h
}

/// One draw of `Z = 1/(rho h) + sum_m h_m d_m^-alpha / (h d^-alpha)`.
pub fn sample_z<R: Rng + ?Sized>(tier: &LinkTier, rng: &mut R) -> f64 {
    let h = fade(tier).sample(rng);
    let noise = 1.0 / (tier.snr * h);
    let shared = if tier.interferers() > 0
        && tier.interference_mode == InterferenceMode::SharedDesiredDistance
    {
        Some(sample_distance(&tier.region, rng).value())
    } else {
        None
    };
    noise + interference_sum(tier, h, shared, rng)
}

/// Shared-distance `Z` with the SNR recomputed per draw from the desired
/// distance, `rho = P d^-alpha / sigma^2`. The tier's own `snr` is ignored.
pub fn sample_z_distance_snr<R: Rng + ?Sized>(
    tier: &LinkTier,
    spatial: &SpatialParams,
    rng: &mut R,
) -> f64 {
    let h = fade(tier).sample(rng);
    let d = sample_distance(&tier.region, rng).value();
    let rho = spatial.tx_power * d.powf(-tier.path_loss_exp) / spatial.noise_power;
    1.0 / (rho * h) + interference_sum(tier, h, Some(d), rng)
}

fn count_below(z: f64, thetas: &[f64], counts: &mut [u64]) {
    for (c, t) in counts.iter_mut().zip(thetas) {
        if z <= 1.0 / t {
            *c += 1;
        }
    }
}

/// `Pr(Z <= 1/theta)` for every threshold from one set of draws (common
/// random numbers), so the estimates are exactly non-increasing in `theta`.
pub fn estimate_success_z_grid(
    tier: &LinkTier,
    thetas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<McEstimate>, McError> {
    check_trials(trials)?;
    check_thresholds(thetas)?;
    tier.validate()
        .map_err(|e| McError::InvalidParams(e.to_string()))?;
    let counts = run_batches(trials, seed, thetas.len(), |rng, counts| {
        count_below(sample_z(tier, rng), thetas, counts)
    });
    Ok(counts
        .into_iter()
        .map(|c| McEstimate::from_counts(c, trials, seed))
        .collect())
}

pub fn estimate_success_z(
    tier: &LinkTier,
    theta: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, McError> {
    Ok(estimate_success_z_grid(tier, &[theta], trials, seed)?[0])
}

/// Grid estimate with the per-draw SNR of [`sample_z_distance_snr`].
pub fn estimate_success_z_distance_snr_grid(
    tier: &LinkTier,
    spatial: &SpatialParams,
    thetas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<McEstimate>, McError> {
    check_trials(trials)?;
    check_thresholds(thetas)?;
    spatial.validate()?;
    let counts = run_batches(trials, seed, thetas.len(), |rng, counts| {
        count_below(sample_z_distance_snr(tier, spatial, rng), thetas, counts)
    });
    Ok(counts
        .into_iter()
        .map(|c| McEstimate::from_counts(c, trials, seed))
        .collect())
}

/// Everything the spatial simulator needs for one tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialTier {
    pub region: DiskRegion,
    /// Transmitters per trial: one desired, the rest interfere.
    pub node_count: u32,
    pub spatial: SpatialParams,
    pub path_loss_exp: f64,
    pub fading_rate: f64,
}

impl SpatialTier {
    fn validate(&self) -> Result<(), McError> {
        self.spatial.validate()?;
        if self.node_count == 0 {
            return Err(McError::InvalidParams(
                "node_count must be at least 1".into(),
            ));
        }
        if !(self.fading_rate.is_finite() && self.fading_rate > 0.0) {
            return Err(McError::InvalidParams(format!(
                "fading_rate must be positive, got {}",
                self.fading_rate
            )));
        }
        if !(self.path_loss_exp.is_finite() && self.path_loss_exp > 0.0) {
            return Err(McError::InvalidParams(format!(
                "path_loss_exp must be positive, got {}",
                self.path_loss_exp
            )));
        }
        Ok(())
    }

    /// One trial's SINR at a uniformly placed receiver.
    pub fn sample_sinr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let fade = Exp::new(self.fading_rate).expect("validated fading rate");
        let [rx, ry] = self.region.sample_point(rng);
        let received = |rng: &mut R| {
            let [x, y] = self.region.sample_point(rng);
            let d = (x - rx).hypot(y - ry);
            self.spatial.tx_power * fade.sample(rng) * d.powf(-self.path_loss_exp)
        };
        let signal = received(rng);
        let interference: f64 = (1..self.node_count).map(|_| received(rng)).sum();
        signal / (self.spatial.noise_power + interference)
    }
}

/// Spatial estimate of `Pr(SINR >= theta)` for every threshold (common random
/// numbers across the grid).
pub fn simulate_spatial_tier_grid(
    tier: &SpatialTier,
    thetas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<McEstimate>, McError> {
    check_trials(trials)?;
    check_thresholds(thetas)?;
    tier.validate()?;
    let counts = run_batches(trials, seed, thetas.len(), |rng, counts| {
        let sinr = tier.sample_sinr(rng);
        for (c, t) in counts.iter_mut().zip(thetas) {
            if sinr >= *t {
                *c += 1;
            }
        }
    });
    Ok(counts
        .into_iter()
        .map(|c| McEstimate::from_counts(c, trials, seed))
        .collect())
}

pub fn simulate_spatial_tier(
    tier: &SpatialTier,
    theta: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate, McError> {
    Ok(simulate_spatial_tier_grid(tier, &[theta], trials, seed)?[0])
}
