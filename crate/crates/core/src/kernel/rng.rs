//! Named, seeded random streams.
//!
//! Generator: xoshiro256** (Blackman & Vigna), state filled from a 64-bit
//! stream seed by SplitMix64. The stream seed is derived from the run's
//! master seed and the stream name:
//!
//! ```text
//! stream_seed = splitmix64(master_seed XOR fnv1a64(name))
//! ```
//!
//! Every call to [`RngStream::sample`] consumes exactly one 64-bit output,
//! whatever the distribution, and converts it to a unit float as
//! `(x >> 11) * 2^-53`. Transcendentals go through `libm`, so the sample
//! sequence for a given `(name, seed)` is the same on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("uniform bounds reversed: min {min} > max {max}")]
    ReversedBounds { min: f64, max: f64 },
    #[error("exponential mean must be positive, got {0}")]
    NonPositiveMean(f64),
    #[error("triangular mode {mode} outside [{min}, {max}]")]
    ModeOutsideRange { min: f64, mode: f64, max: f64 },
    #[error("empirical table needs equal-length, non-empty values and weights")]
    MalformedTable,
    #[error("empirical weights must be non-negative with a positive total")]
    BadWeights,
    #[error("parameter is not finite")]
    NonFinite,
}

/// Supported input distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Distribution {
    Constant {
        value: f64,
    },
    Uniform {
        min: f64,
        max: f64,
    },
    Exponential {
        mean: f64,
    },
    Triangular {
        min: f64,
        mode: f64,
        max: f64,
    },
    /// Discrete table: `values[i]` is drawn with probability
    /// `weights[i] / sum(weights)`.
    Empirical {
        values: Vec<f64>,
        weights: Vec<f64>,
    },
}

impl Distribution {
    pub fn constant(value: f64) -> Self {
        Distribution::Constant { value }
    }

    pub fn uniform(min: f64, max: f64) -> Self {
        Distribution::Uniform { min, max }
    }

    pub fn exponential(mean: f64) -> Self {
        Distribution::Exponential { mean }
    }

    pub fn triangular(min: f64, mode: f64, max: f64) -> Self {
        Distribution::Triangular { min, mode, max }
    }

    pub fn validate(&self) -> Result<(), DistributionError> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match self {
            Distribution::Constant { value } => {
                if !value.is_finite() {
                    return Err(DistributionError::NonFinite);
                }
            }
            &Distribution::Uniform { min, max } => {
                if !finite(&[min, max]) {
                    return Err(DistributionError::NonFinite);
                }
                if min > max {
                    return Err(DistributionError::ReversedBounds { min, max });
                }
            }
            &Distribution::Exponential { mean } => {
                if !mean.is_finite() {
                    return Err(DistributionError::NonFinite);
                }
                if mean <= 0.0 {
                    return Err(DistributionError::NonPositiveMean(mean));
                }
            }
            &Distribution::Triangular { min, mode, max } => {
                if !finite(&[min, mode, max]) {
                    return Err(DistributionError::NonFinite);
                }
                if min > max {
                    return Err(DistributionError::ReversedBounds { min, max });
                }
                if mode < min || mode > max {
                    return Err(DistributionError::ModeOutsideRange { min, mode, max });
                }
            }
            Distribution::Empirical { values, weights } => {
                if values.is_empty() || values.len() != weights.len() {
                    return Err(DistributionError::MalformedTable);
                }
                if !finite(values) || !finite(weights) {
                    return Err(DistributionError::NonFinite);
                }
                if weights.iter().any(|&w| w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
                    return Err(DistributionError::BadWeights);
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Constant { value } => *value,
            Distribution::Uniform { min, max } => 0.5 * (min + max),
            Distribution::Exponential { mean } => *mean,
            Distribution::Triangular { min, mode, max } => (min + mode + max) / 3.0,
            Distribution::Empirical { values, weights } => {
                let total: f64 = weights.iter().sum();
                values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total
            }
        }
    }

    /// Smallest value the distribution can produce.
    pub fn lower_bound(&self) -> f64 {
        match self {
            Distribution::Constant { value } => *value,
            Distribution::Uniform { min, .. } | Distribution::Triangular { min, .. } => *min,
            Distribution::Exponential { .. } => 0.0,
            Distribution::Empirical { values, .. } => {
                values.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Largest value the distribution can produce (infinite for exponential).
    pub fn upper_bound(&self) -> f64 {
        match self {
            Distribution::Constant { value } => *value,
            Distribution::Uniform { max, .. } | Distribution::Triangular { max, .. } => *max,
            Distribution::Exponential { .. } => f64::INFINITY,
            Distribution::Empirical { values, .. } => {
                values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Inverse-CDF transform of a unit draw `u` in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            Distribution::Constant { value } => *value,
            Distribution::Uniform { min, max } => min + (max - min) * u,
            Distribution::Exponential { mean } => -mean * libm::log1p(-u),
            &Distribution::Triangular { min, mode, max } => {
                let span = max - min;
                if span == 0.0 {
                    return min;
                }
                let split = (mode - min) / span;
                if u < split {
                    min + libm::sqrt(u * span * (mode - min))
                } else {
                    max - libm::sqrt((1.0 - u) * span * (max - mode))
                }
            }
            Distribution::Empirical { values, weights } => {
                let total: f64 = weights.iter().sum();
                let target = u * total;
                let mut acc = 0.0;
                for (v, w) in values.iter().zip(weights) {
                    acc += w;
                    if target < acc {
                        return *v;
                    }
                }
                // u * total rounded up to the full total; fall back to the
                // last value with positive weight
                values
                    .iter()
                    .zip(weights)
                    .rev()
                    .find(|(_, &w)| w > 0.0)
                    .map(|(v, _)| *v)
                    .unwrap_or(values[values.len() - 1])
            }
        }
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// One SplitMix64 output step for the given state.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_stream_seed(master_seed: u64, name: &str) -> u64 {
    splitmix64(master_seed ^ fnv1a64(name.as_bytes()))
}

#[derive(Debug, Clone)]
pub struct RngStream {
    name: String,
    seed: u64,
    draws: u64,
    rng: Xoshiro256StarStar,
}

impl RngStream {
    /// A stream seeded directly with `seed`.
    pub fn new(name: impl Into<String>, seed: u64) -> Self {
        Self {
            name: name.into(),
            seed,
            draws: 0,
            rng: Xoshiro256StarStar::seed_from_u64(seed),
        }
    }

    /// The stream called `name` under a run's master seed.
    pub fn derive(master_seed: u64, name: &str) -> Self {
        Self::new(name, derive_stream_seed(master_seed, name))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of 64-bit outputs consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One draw from `dist`. Callers validate `dist` up front; sampling an
    /// invalid distribution gives an unspecified (but deterministic) value.
    pub fn sample(&mut self, dist: &Distribution) -> f64 {
        let u = self.next_unit();
        dist.quantile(u)
    }

    pub fn try_sample(&mut self, dist: &Distribution) -> Result<f64, DistributionError> {
        dist.validate()?;
        Ok(self.sample(dist))
    }

    /// Bernoulli trial with success probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        self.next_unit() < p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_returns_value_and_still_advances() {
        let mut a = RngStream::new("x", 1);
        let mut b = RngStream::new("x", 1);
        assert_eq!(a.sample(&Distribution::constant(4.2)), 4.2);
        b.next_u64();
        assert_eq!(a.next_u64(), b.next_u64());
        assert_eq!(a.draws(), 2);
    }

    #[test]
    fn degenerate_uniform() {
        let mut s = RngStream::new("x", 9);
        for _ in 0..10 {
            assert_eq!(s.sample(&Distribution::uniform(3.0, 3.0)), 3.0);
        }
    }

    #[test]
    fn exponential_mean_law_of_large_numbers() {
        // sd of the mean of 1e5 draws is 10/sqrt(1e5) ~ 0.0316, so 1% (0.1)
        // is more than three standard errors
        let mut s = RngStream::derive(2024, "crane_cycle");
        let n = 100_000;
        let mean = (0..n)
            .map(|_| s.sample(&Distribution::exponential(10.0)))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 10.0).abs() < 0.1, "mean {mean}");
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(Distribution::uniform(5.0, 1.0).validate().is_err());
        assert!(Distribution::exponential(0.0).validate().is_err());
        assert!(Distribution::triangular(1.0, 5.0, 4.0).validate().is_err());
        let bad = Distribution::Empirical {
            values: vec![1.0],
            weights: vec![],
        };
        assert_eq!(bad.validate(), Err(DistributionError::MalformedTable));
        let mut s = RngStream::new("x", 0);
        assert!(s.try_sample(&Distribution::exponential(-1.0)).is_err());
        assert_eq!(s.draws(), 0);
    }

    #[test]
    fn same_name_and_seed_replay() {
        let mut a = RngStream::derive(42, "arrivals");
        let mut b = RngStream::derive(42, "arrivals");
        let mut c = RngStream::derive(42, "truck_travel");
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..8).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn generator_is_pinned() {
        // Reference outputs for xoshiro256** seeded through SplitMix64 from
        // seed 0. A change here means replays from older versions diverge.
        let mut s = RngStream::new("pin", 0);
        let got: Vec<u64> = (0..3).map(|_| s.next_u64()).collect();
        assert_eq!(got, PINNED_SEED0);
    }

    const PINNED_SEED0: [u64; 3] = [
        0x99ec_5f36_cb75_f2b4,
        0xbf6e_1f78_4956_452a,
        0x1a5f_849d_4933_e6e0,
    ];

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a64(b""), 0xcbf2_9ce4_8422_2325);
        assert_eq!(fnv1a64(b"a"), 0xaf63_dc4c_8601_ec8c);
    }

    #[test]
    fn triangular_stays_in_support() {
        let d = Distribution::triangular(1.0, 2.0, 4.0);
        let mut s = RngStream::new("t", 5);
        for _ in 0..10_000 {
            let x = s.sample(&d);
            assert!((1.0..=4.0).contains(&x));
        }
        assert_eq!(d.quantile(0.0), 1.0);
    }

    #[test]
    fn empirical_frequencies() {
        let d = Distribution::Empirical {
            values: vec![1.0, 2.0, 3.0],
            weights: vec![1.0, 0.0, 3.0],
        };
        let mut s = RngStream::new("e", 11);
        let n = 40_000;
        let mut counts = [0usize; 3];
        for _ in 0..n {
            counts[s.sample(&d) as usize - 1] += 1;
        }
        assert_eq!(counts[1], 0);
        let p3 = counts[2] as f64 / n as f64;
        assert!((p3 - 0.75).abs() < 0.01, "{p3}");
    }
}
