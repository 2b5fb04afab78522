//! Synthetic trajectory matrices with known significant sets.
//!
//! Outcomes are unit random walks. A planted signal is the sum of the
//! outcome walks it carries plus an independent noise walk whose
//! innovation scale is 1/snr, so after differencing the regression sees
//! the outcome innovations at the requested signal-to-noise ratio. Null
//! signals are pure unit noise walks. The generator returns the ground
//! truth alongside the matrix so recovery and overlap reporting can be
//! scored exactly.

use indexmap::IndexMap;
use rand::Rng;
use rand_distr::StandardNormal;
use std::collections::BTreeSet;

use super::{TrajectoryError, TrajectoryMatrix};
use crate::stats::SeedSpec;

#[derive(Debug, Clone)]
pub struct PlantedFixtureConfig {
    pub n_versions: usize,
    pub n_signals: usize,
    /// Signals carrying the first outcome.
    pub planted_a: usize,
    /// Signals carrying the second outcome.
    pub planted_b: usize,
    /// Signals carrying both (counted inside both planted counts).
    pub overlap: usize,
    /// Ratio of outcome-innovation scale to noise-innovation scale in the
    /// differenced signal.
    pub snr: f64,
    pub outcome_a: String,
    pub outcome_b: String,
}

impl Default for PlantedFixtureConfig {
    fn default() -> Self {
        Self {
            n_versions: 66,
            n_signals: 9216,
            planted_a: 200,
            planted_b: 200,
            overlap: 50,
            snr: 1.0,
            outcome_a: "bias".into(),
            outcome_b: "quality".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedFixture {
    pub matrix: TrajectoryMatrix,
    /// Signals planted on the first outcome.
    pub truth_a: BTreeSet<String>,
    /// Signals planted on the second outcome.
    pub truth_b: BTreeSet<String>,
}

/// Generate a matrix with known planted structure, deterministically
/// from `seed`.
pub fn planted_fixture(
    config: &PlantedFixtureConfig,
    seed: &SeedSpec,
) -> Result<PlantedFixture, TrajectoryError> {
    if config.overlap > config.planted_a.min(config.planted_b) {
        return Err(TrajectoryError::Fixture(format!(
            "overlap {} exceeds a planted count ({}, {})",
            config.overlap, config.planted_a, config.planted_b
        )));
    }
    let distinct_planted = config.planted_a + config.planted_b - config.overlap;
    if distinct_planted > config.n_signals {
        return Err(TrajectoryError::Fixture(format!(
            "{distinct_planted} planted signals exceed {} total",
            config.n_signals
        )));
    }
    if config.n_versions < 4 {
        return Err(TrajectoryError::Fixture(
            "need at least 4 versions for the differenced regression".into(),
        ));
    }
    if !(config.snr > 0.0) || !config.snr.is_finite() {
        return Err(TrajectoryError::Fixture(format!(
            "snr must be positive and finite, got {}",
            config.snr
        )));
    }

    let t = config.n_versions;
    let y_a = unit_walk(t, &seed.derive("outcome/a"));
    let y_b = unit_walk(t, &seed.derive("outcome/b"));
    let noise_scale = 1.0 / config.snr;

    let width = config.n_signals.to_string().len();
    let mut signals = IndexMap::with_capacity(config.n_signals);
    let mut truth_a = BTreeSet::new();
    let mut truth_b = BTreeSet::new();

    // Layout: [A-only | A∩B | B-only | nulls].
    let a_end = config.planted_a;
    let overlap_start = config.planted_a - config.overlap;
    let b_end = distinct_planted;
    for i in 0..config.n_signals {
        let name = format!("n{:0width$}", i + 1);
        let in_a = i < a_end;
        let in_b = (overlap_start..b_end).contains(&i);
        let scale = if in_a || in_b { noise_scale } else { 1.0 };
        let mut values = scaled_walk(t, scale, &seed.derive(format!("signal/{i}")));
        if in_a {
            add_assign(&mut values, &y_a);
            truth_a.insert(name.clone());
        }
        if in_b {
            add_assign(&mut values, &y_b);
            truth_b.insert(name.clone());
        }
        signals.insert(name, values);
    }

    let mut outcomes = IndexMap::with_capacity(2);
    outcomes.insert(config.outcome_a.clone(), y_a);
    outcomes.insert(config.outcome_b.clone(), y_b);

    let matrix = TrajectoryMatrix::new((0..t as i64).collect(), outcomes, signals)?;
    Ok(PlantedFixture {
        matrix,
        truth_a,
        truth_b,
    })
}

fn unit_walk(t: usize, seed: &SeedSpec) -> Vec<f64> {
    scaled_walk(t, 1.0, seed)
}

fn scaled_walk(t: usize, scale: f64, seed: &SeedSpec) -> Vec<f64> {
    let mut rng = seed.rng();
    let mut acc = 0.0;
    (0..t)
        .map(|_| {
            acc += scale * rng.sample::<f64, _>(StandardNormal);
            acc
        })
        .collect()
}

fn add_assign(values: &mut [f64], other: &[f64]) {
    for (v, o) in values.iter_mut().zip(other) {
        *v += o;
    }
}
