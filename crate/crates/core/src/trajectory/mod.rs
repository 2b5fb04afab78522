//! Bulk mechanistic trajectory analysis.
//!
//! A [`TrajectoryMatrix`] holds per-version outcome series (bias
//! proportion, quality index, …) and signal series (one per neuron or
//! probe) over the same ascending version index. [`analyze_all`] runs
//! the differenced Newey–West regression of one outcome against every
//! signal, [`significant_set`] thresholds the p-values, and
//! [`overlap_report`] compares the significant sets of two outcomes.

mod overlap;
mod planted;

pub use overlap::{overlap_report, OverlapReport};
pub use planted::{planted_fixture, PlantedFixture, PlantedFixtureConfig};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use thiserror::Error;

use crate::regression::{regress_differenced, DiffRegressionResult, RegressionError, Series};

#[derive(Debug, Error)]
pub enum TrajectoryError {
    #[error("row {row}, column {col}: {message}")]
    Schema {
        row: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate column `{name}` at position {col}")]
    DuplicateColumn { name: String, col: usize },
    #[error("version order violated at row {row}: {prev} then {next}")]
    NonMonotoneVersions { row: usize, prev: i64, next: i64 },
    #[error("unknown outcome `{name}`; available: {}", available.join(", "))]
    MissingOutcome { name: String, available: Vec<String> },
    #[error("mask index {index} out of range: only {transitions} transitions exist")]
    BadMaskIndex { index: usize, transitions: usize },
    #[error("mask excludes too many transitions: {left} observations left")]
    MaskTooAggressive { left: usize },
    #[error("threshold {0} must lie in (0, 1]")]
    BadThreshold(f64),
    #[error("invalid fixture: {0}")]
    Fixture(String),
    #[error("set size {size} exceeds universe {universe}")]
    SetExceedsUniverse { size: usize, universe: usize },
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Aligned outcome and signal series over ascending model versions.
#[derive(Debug, Clone)]
pub struct TrajectoryMatrix {
    version_ids: Vec<i64>,
    outcomes: IndexMap<String, Vec<f64>>,
    signals: IndexMap<String, Vec<f64>>,
    round_boundary: Option<BTreeSet<usize>>,
}

impl TrajectoryMatrix {
    pub fn new(
        version_ids: Vec<i64>,
        outcomes: IndexMap<String, Vec<f64>>,
        signals: IndexMap<String, Vec<f64>>,
    ) -> Result<Self, TrajectoryError> {
        let n = version_ids.len();
        for (row, pair) in version_ids.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(TrajectoryError::NonMonotoneVersions {
                    row: row + 2,
                    prev: pair[0],
                    next: pair[1],
                });
            }
        }
        for (name, series) in outcomes.iter().chain(signals.iter()) {
            if series.len() != n {
                return Err(TrajectoryError::Schema {
                    row: 0,
                    col: 0,
                    message: format!(
                        "series `{name}` has {} values for {n} versions",
                        series.len()
                    ),
                });
            }
        }
        Ok(Self {
            version_ids,
            outcomes,
            signals,
            round_boundary: None,
        })
    }

    /// Parse the CSV schema `version,y:<outcome>…,x:<signal>…`.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, TrajectoryError> {
        #[derive(Clone, Copy)]
        enum Kind {
            Outcome,
            Signal,
        }

        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();

        let header = match records.next() {
            Some(h) => h.map_err(|e| TrajectoryError::Schema {
                row: 1,
                col: 0,
                message: e.to_string(),
            })?,
            None => {
                return Err(TrajectoryError::Schema {
                    row: 1,
                    col: 0,
                    message: "empty file".into(),
                })
            }
        };
        if header.get(0) != Some("version") {
            return Err(TrajectoryError::Schema {
                row: 1,
                col: 1,
                message: format!(
                    "first column must be `version`, found `{}`",
                    header.get(0).unwrap_or("")
                ),
            });
        }
        let mut columns: Vec<(Kind, String)> = Vec::with_capacity(header.len() - 1);
        let mut outcomes: IndexMap<String, Vec<f64>> = IndexMap::new();
        let mut signals: IndexMap<String, Vec<f64>> = IndexMap::new();
        for (i, cell) in header.iter().enumerate().skip(1) {
            let col = i + 1;
            let (kind, name) = if let Some(name) = cell.strip_prefix("y:") {
                (Kind::Outcome, name)
            } else if let Some(name) = cell.strip_prefix("x:") {
                (Kind::Signal, name)
            } else {
                return Err(TrajectoryError::Schema {
                    row: 1,
                    col,
                    message: format!("column `{cell}` must be prefixed `y:` or `x:`"),
                });
            };
            if name.is_empty() {
                return Err(TrajectoryError::Schema {
                    row: 1,
                    col,
                    message: "empty series name".into(),
                });
            }
            let clash = match kind {
                Kind::Outcome => outcomes.insert(name.to_string(), Vec::new()).is_some(),
                Kind::Signal => signals.insert(name.to_string(), Vec::new()).is_some(),
            };
            if clash {
                return Err(TrajectoryError::DuplicateColumn {
                    name: name.to_string(),
                    col,
                });
            }
            columns.push((kind, name.to_string()));
        }

        let mut version_ids: Vec<i64> = Vec::new();
        for (r, record) in records.enumerate() {
            let row = r + 2;
            let record = record.map_err(|e| TrajectoryError::Schema {
                row,
                col: 0,
                message: e.to_string(),
            })?;
            if record.len() != columns.len() + 1 {
                return Err(TrajectoryError::Schema {
                    row,
                    col: 0,
                    message: format!(
                        "expected {} cells, found {}",
                        columns.len() + 1,
                        record.len()
                    ),
                });
            }
            let version: i64 = record
                .get(0)
                .unwrap()
                .parse()
                .map_err(|_| TrajectoryError::Schema {
                    row,
                    col: 1,
                    message: format!("bad version `{}`", record.get(0).unwrap()),
                })?;
            if let Some(&prev) = version_ids.last() {
                if version <= prev {
                    return Err(TrajectoryError::NonMonotoneVersions {
                        row,
                        prev,
                        next: version,
                    });
                }
            }
            version_ids.push(version);
            for (i, (kind, name)) in columns.iter().enumerate() {
                let cell = record.get(i + 1).unwrap();
                let value: f64 = cell.parse().map_err(|_| TrajectoryError::Schema {
                    row,
                    col: i + 2,
                    message: format!("bad number `{cell}` in `{name}`"),
                })?;
                match kind {
                    Kind::Outcome => outcomes.get_mut(name).unwrap().push(value),
                    Kind::Signal => signals.get_mut(name).unwrap().push(value),
                }
            }
        }

        Self::new(version_ids, outcomes, signals)
    }

    pub fn from_csv_path(path: &Path) -> Result<Self, TrajectoryError> {
        Self::from_csv(std::fs::File::open(path)?)
    }

    /// Exclude version transitions (0-based differenced indices) from
    /// every regression, e.g. the joins between training rounds.
    pub fn set_round_boundary(&mut self, mask: BTreeSet<usize>) -> Result<(), TrajectoryError> {
        let transitions = self.n_versions().saturating_sub(1);
        if let Some(&bad) = mask.iter().find(|&&i| i >= transitions) {
            return Err(TrajectoryError::BadMaskIndex {
                index: bad,
                transitions,
            });
        }
        self.round_boundary = Some(mask);
        Ok(())
    }

    pub fn round_boundary(&self) -> Option<&BTreeSet<usize>> {
        self.round_boundary.as_ref()
    }

    pub fn n_versions(&self) -> usize {
        self.version_ids.len()
    }

    pub fn version_ids(&self) -> &[i64] {
        &self.version_ids
    }

    pub fn outcome_names(&self) -> Vec<String> {
        self.outcomes.keys().cloned().collect()
    }

    pub fn signal_names(&self) -> Vec<String> {
        self.signals.keys().cloned().collect()
    }

    pub fn n_signals(&self) -> usize {
        self.signals.len()
    }

    pub fn outcome(&self, name: &str) -> Option<&[f64]> {
        self.outcomes.get(name).map(Vec::as_slice)
    }

    pub fn signal(&self, name: &str) -> Option<&[f64]> {
        self.signals.get(name).map(Vec::as_slice)
    }

    /// Write the matrix in the same CSV schema [`from_csv`] reads.
    ///
    /// [`from_csv`]: TrajectoryMatrix::from_csv
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "version")?;
        for name in self.outcomes.keys() {
            write!(w, ",y:{name}")?;
        }
        for name in self.signals.keys() {
            write!(w, ",x:{name}")?;
        }
        writeln!(w)?;
        for (i, version) in self.version_ids.iter().enumerate() {
            write!(w, "{version}")?;
            for series in self.outcomes.values() {
                write!(w, ",{}", series[i])?;
            }
            for series in self.signals.values() {
                write!(w, ",{}", series[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Read a sidecar mask file: one transition index per line, `#` comments
/// allowed.
pub fn load_round_boundary_mask<R: Read>(reader: R) -> Result<BTreeSet<usize>, TrajectoryError> {
    let mut mask = BTreeSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let index: usize = line.parse().map_err(|_| TrajectoryError::Schema {
            row: i + 1,
            col: 1,
            message: format!("bad transition index `{line}`"),
        })?;
        mask.insert(index);
    }
    Ok(mask)
}

/// Difference, mask, and drop the excluded transitions.
fn masked_diff(values: &[f64], mask: Option<&BTreeSet<usize>>) -> Vec<f64> {
    values
        .windows(2)
        .enumerate()
        .filter(|(i, _)| mask.is_none_or(|m| !m.contains(i)))
        .map(|(_, w)| w[1] - w[0])
        .collect()
}

/// Run the differenced regression of `outcome` against every signal.
///
/// Per-signal degeneracies yield untestable results rather than errors,
/// so the output has one entry per signal. Keys are signal names, so the
/// output order never depends on column order or thread scheduling.
pub fn analyze_all(
    matrix: &TrajectoryMatrix,
    outcome: &str,
    lag: Option<usize>,
) -> Result<BTreeMap<String, DiffRegressionResult>, TrajectoryError> {
    let y = matrix
        .outcome(outcome)
        .ok_or_else(|| TrajectoryError::MissingOutcome {
            name: outcome.to_string(),
            available: matrix.outcome_names(),
        })?;
    let mask = matrix.round_boundary();
    let dy = masked_diff(y, mask);
    if dy.len() < 3 {
        return Err(TrajectoryError::MaskTooAggressive { left: dy.len() });
    }
    let dy = Series::new(format!("diff({outcome})"), dy);

    let entries: Vec<(&String, &Vec<f64>)> = matrix.signals.iter().collect();
    let results: Vec<(String, DiffRegressionResult)> = entries
        .into_par_iter()
        .map(|(name, values)| {
            let dx = Series::new(format!("diff({name})"), masked_diff(values, mask));
            let result = regress_differenced(&dx, &dy, lag)?;
            Ok((name.clone(), result))
        })
        .collect::<Result<_, TrajectoryError>>()?;
    Ok(results.into_iter().collect())
}

/// Names whose two-sided p-value falls below `threshold`. Untestable
/// signals carry p = 1 and can never enter.
pub fn significant_set(
    results: &BTreeMap<String, DiffRegressionResult>,
    threshold: f64,
) -> Result<BTreeSet<String>, TrajectoryError> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(TrajectoryError::BadThreshold(threshold));
    }
    Ok(results
        .iter()
        .filter(|(_, r)| r.p_value < threshold)
        .map(|(name, _)| name.clone())
        .collect())
}

/// Benjamini–Hochberg step-up selection at false-discovery rate `q`.
///
/// Provided for callers who want multiple-testing control; the plain
/// raw-threshold [`significant_set`] is the default everywhere else.
pub fn significant_set_bh(
    results: &BTreeMap<String, DiffRegressionResult>,
    q: f64,
) -> Result<BTreeSet<String>, TrajectoryError> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(TrajectoryError::BadThreshold(q));
    }
    let mut testable: Vec<(&String, f64)> = results
        .iter()
        .filter(|(_, r)| r.testable)
        .map(|(name, r)| (name, r.p_value))
        .collect();
    testable.sort_by(|a, b| a.1.total_cmp(&b.1));
    let m = testable.len() as f64;
    let mut cutoff_rank = 0;
    for (i, (_, p)) in testable.iter().enumerate() {
        if *p <= (i + 1) as f64 / m * q {
            cutoff_rank = i + 1;
        }
    }
    Ok(testable
        .into_iter()
        .take(cutoff_rank)
        .map(|(name, _)| name.clone())
        .collect())
}

/// Per-outcome section of a [`SignificanceReport`].
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeSection {
    pub n_signals: usize,
    pub n_testable: usize,
    pub n_significant: usize,
    /// Significant signals with their regression results.
    pub significant: BTreeMap<String, DiffRegressionResult>,
}

impl OutcomeSection {
    pub fn build(
        results: &BTreeMap<String, DiffRegressionResult>,
        threshold: f64,
    ) -> Result<Self, TrajectoryError> {
        let names = significant_set(results, threshold)?;
        let significant: BTreeMap<String, DiffRegressionResult> = names
            .iter()
            .map(|n| (n.clone(), results[n].clone()))
            .collect();
        Ok(Self {
            n_signals: results.len(),
            n_testable: results.values().filter(|r| r.testable).count(),
            n_significant: significant.len(),
            significant,
        })
    }

    pub fn significant_names(&self) -> BTreeSet<String> {
        self.significant.keys().cloned().collect()
    }
}

/// Significant-set report for one or two outcomes, JSON-serializable.
#[derive(Debug, Clone, Serialize)]
pub struct SignificanceReport {
    pub threshold: f64,
    pub outcomes: BTreeMap<String, OutcomeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub overlap: Option<OverlapReport>,
}

/// Per-signal results CSV: `signal,beta,se,t,p,lag,testable`.
pub fn write_results_csv<W: Write>(
    results: &BTreeMap<String, DiffRegressionResult>,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "signal,beta,se,t,p,lag,testable")?;
    for (name, r) in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            name, r.beta_hat, r.se_nw, r.t_stat, r.p_value, r.lag_used, r.testable as u8
        )?;
    }
    Ok(())
}
