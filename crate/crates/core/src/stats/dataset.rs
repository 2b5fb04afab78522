//! Immutable value sequences with provenance tags.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use super::StatsError;

/// Clamping epsilon applied on ingestion and synthetic generation so that
/// log-likelihoods stay finite at the support boundary.
pub const CLAMP_EPS: f64 = 1e-9;

/// Where the values of a [`Dataset`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Drawn from (or standing in for) a ground-truth distribution.
    Real,
    /// Generated by the fitted model of generation `k`.
    Synthetic(u32),
    /// Composed from several sources by a mitigation policy.
    Mixed,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Real => write!(f, "real"),
            Provenance::Synthetic(k) => write!(f, "synthetic:gen_{k}"),
            Provenance::Mixed => write!(f, "mixed"),
        }
    }
}

impl FromStr for Provenance {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, StatsError> {
        if s == "real" {
            return Ok(Provenance::Real);
        }
        if s == "mixed" {
            return Ok(Provenance::Mixed);
        }
        if let Some(k) = s.strip_prefix("synthetic:gen_") {
            if let Ok(k) = k.parse::<u32>() {
                return Ok(Provenance::Synthetic(k));
            }
        }
        Err(StatsError::BadProvenance { tag: s.to_string() })
    }
}

/// Clamp a unit-interval value into `[CLAMP_EPS, 1 - CLAMP_EPS]`.
pub(crate) fn clamp_unit(v: f64) -> f64 {
    v.clamp(CLAMP_EPS, 1.0 - CLAMP_EPS)
}

/// An ordered, immutable sequence of values in (0, 1) with a provenance tag.
///
/// Values are clamped into `[CLAMP_EPS, 1 - CLAMP_EPS]` at construction;
/// anything outside [0, 1] (or non-finite) is rejected by
/// [`Dataset::try_new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    provenance: Provenance,
}

impl Dataset {
    /// Build a dataset from values already known to lie in [0, 1]
    /// (e.g. sampler output). Clamps, does not validate.
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Self {
        let values = values.into_iter().map(clamp_unit).collect();
        Self { values, provenance }
    }

    /// Build a dataset from untrusted values, rejecting anything outside
    /// [0, 1] or non-finite, and clamping the rest.
    pub fn try_new(values: Vec<f64>, provenance: Provenance) -> Result<Self, StatsError> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(StatsError::BadValue { index, value });
            }
        }
        Ok(Self::new(values, provenance))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Write as plain text: a provenance header line then one value per
    /// line in shortest round-trip decimal form.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), StatsError> {
        writeln!(w, "# provenance={}", self.provenance)?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    /// Read the text format produced by [`Dataset::write_to`]. The header
    /// line is optional; without it the provenance defaults to `Real`.
    pub fn read_from<R: Read>(r: R) -> Result<Self, StatsError> {
        let reader = BufReader::new(r);
        let mut provenance = Provenance::Real;
        let mut values = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(tag) = rest.strip_prefix("provenance=") {
                    provenance = tag.trim().parse()?;
                }
                continue;
            }
            let v: f64 = line.parse().map_err(|_| StatsError::Parse {
                line: i + 1,
                message: format!("not a number: `{line}`"),
            })?;
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(StatsError::Parse {
                    line: i + 1,
                    message: format!("value {v} outside [0, 1]"),
                });
            }
            values.push(v);
        }
        Ok(Self::new(values, provenance))
    }

    pub fn read_from_path(path: &Path) -> Result<Self, StatsError> {
        Self::read_from(std::fs::File::open(path)?)
    }

    pub fn write_to_path(&self, path: &Path) -> Result<(), StatsError> {
        let mut f = std::fs::File::create(path)?;
        self.write_to(&mut f)
    }
}
