//! Paired runs under common random numbers.
//!
//! Both sides of a pair use the same seed, so each named stream replays the
//! same draws. Ships, manifests and cycle times line up across A and B, and
//! the per-seed difference isolates the effect of the change.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::SimTime;
use crate::kpi::{KpiError, KpiReport};
use crate::scenario::ScenarioConfig;
use crate::terminal::{run_simulation, SimError};

use super::PolicySet;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("a paired comparison needs at least two seeds, got {0}")]
    TooFewSeeds(usize),
    #[error("side A has {a} reports but side B has {b}")]
    Unpaired { a: usize, b: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Kpi(#[from] KpiError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedPair {
    pub seed: u64,
    /// `(kpi, a, b, b - a)` in report order.
    pub values: Vec<(String, f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpiDelta {
    pub kpi: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// Mean of per-seed `b - a`.
    pub mean_delta: f64,
    /// Seeds where B beat A (`b > a`).
    pub positive: usize,
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedComparison {
    pub scenario_a: String,
    pub scenario_b: String,
    pub seeds: Vec<u64>,
    pub deltas: Vec<KpiDelta>,
    pub pairs: Vec<SeedPair>,
}

impl PairedComparison {
    /// Builds the comparison from reports already computed seed by seed.
    /// `a[i]` and `b[i]` must share a seed.
    pub fn from_reports(a: &[KpiReport], b: &[KpiReport]) -> Result<Self, CompareError> {
        if a.len() != b.len() {
            return Err(CompareError::Unpaired {
                a: a.len(),
                b: b.len(),
            });
        }
        if a.len() < 2 {
            return Err(CompareError::TooFewSeeds(a.len()));
        }
        let mut pairs = Vec::with_capacity(a.len());
        for (ra, rb) in a.iter().zip(b) {
            let sa = ra.scalars();
            let sb = rb.scalars();
            let values = sa
                .into_iter()
                .zip(sb)
                .filter(|((ka, _), (kb, _))| ka == kb)
                .map(|((k, va), (_, vb))| (k, va, vb, vb - va))
                .collect();
            pairs.push(SeedPair {
                seed: ra.seed,
                values,
            });
        }

        let n = pairs.len() as f64;
        let deltas = pairs[0]
            .values
            .iter()
            .enumerate()
            .map(|(i, (kpi, ..))| {
                let mut d = KpiDelta {
                    kpi: kpi.clone(),
                    mean_a: 0.0,
                    mean_b: 0.0,
                    mean_delta: 0.0,
                    positive: 0,
                    negative: 0,
                };
                for p in &pairs {
                    let Some((_, va, vb, delta)) = p.values.get(i) else {
                        continue;
                    };
                    d.mean_a += va;
                    d.mean_b += vb;
                    d.mean_delta += delta;
                    if *delta > 0.0 {
                        d.positive += 1;
                    } else if *delta < 0.0 {
                        d.negative += 1;
                    }
                }
                d.mean_a /= n;
                d.mean_b /= n;
                d.mean_delta /= n;
                d
            })
            .collect();

        Ok(PairedComparison {
            scenario_a: a[0].scenario.clone(),
            scenario_b: b[0].scenario.clone(),
            seeds: pairs.iter().map(|p| p.seed).collect(),
            deltas,
            pairs,
        })
    }

    pub fn delta(&self, kpi: &str) -> Option<&KpiDelta> {
        self.deltas.iter().find(|d| d.kpi == kpi)
    }
}

pub fn run_report(
    config: &ScenarioConfig,
    seed: u64,
    horizon: SimTime,
) -> Result<KpiReport, CompareError> {
    let outcome = run_simulation(config, seed, horizon)?;
    Ok(KpiReport::from_outcome(&outcome)?)
}

/// Runs both scenarios on every seed and pairs the reports.
pub fn compare_scenarios(
    a: &ScenarioConfig,
    b: &ScenarioConfig,
    seeds: &[u64],
    horizon: SimTime,
) -> Result<PairedComparison, CompareError> {
    if seeds.len() < 2 {
        return Err(CompareError::TooFewSeeds(seeds.len()));
    }
    let mut ra = Vec::with_capacity(seeds.len());
    let mut rb = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        ra.push(run_report(a, seed, horizon)?);
        rb.push(run_report(b, seed, horizon)?);
    }
    PairedComparison::from_reports(&ra, &rb)
}

/// One scenario under two policy sets.
pub fn compare_policies(
    scenario: &ScenarioConfig,
    a: &PolicySet,
    b: &PolicySet,
    seeds: &[u64],
) -> Result<PairedComparison, CompareError> {
    let mut sa = scenario.clone();
    sa.policies = a.clone();
    let mut sb = scenario.clone();
    sb.policies = b.clone();
    compare_scenarios(&sa, &sb, seeds, scenario.horizon())
}
