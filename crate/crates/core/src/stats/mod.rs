//! Beta-distribution kernels, seeded sampling, and dataset handling.
//!
//! Everything downstream (fitting, generational loops, collapse ensembles)
//! is built on three pieces that live here:
//!
//! - [`BetaParams`] — a validated Beta(α, β) parameter pair with density,
//!   log-density, and moment helpers,
//! - [`SeedSpec`] — a (master seed, stream label) pair that derives
//!   independent, reproducible RNG streams,
//! - [`Dataset`] — an immutable sequence of values in (0, 1) with a
//!   provenance tag and plain-text serialization.

mod beta;
mod dataset;
mod seed;

pub use beta::{BetaMoments, BetaParams};
pub use dataset::{Dataset, Provenance, CLAMP_EPS};
pub use seed::SeedSpec;

use thiserror::Error;

/// Errors from distribution kernels, sampling, and dataset ingestion.
#[derive(Debug, Error)]
pub enum StatsError {
    /// A shape parameter was non-positive or non-finite.
    #[error("invalid {name} shape parameter: {value} (must be positive and finite)")]
    InvalidShape { name: &'static str, value: f64 },
    /// A density was evaluated outside the open support (0, 1).
    #[error("x = {x} is outside the open interval (0, 1)")]
    OutOfSupport { x: f64 },
    /// A dataset value could not be ingested.
    #[error("value {value} at index {index} is outside [0, 1] or not finite")]
    BadValue { index: usize, value: f64 },
    /// An empty sample was requested.
    #[error("sample size must be at least 1")]
    EmptySample,
    /// A dataset was too small for the requested operation.
    #[error("dataset has {len} values, need at least {needed}")]
    TooFewValues { len: usize, needed: usize },
    /// Malformed provenance tag in a dataset file.
    #[error("unrecognized provenance tag `{tag}`")]
    BadProvenance { tag: String },
    /// Malformed dataset file contents.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
