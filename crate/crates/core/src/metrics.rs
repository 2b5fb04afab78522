//! Outcome series built from labeled article and sentence files.
//!
//! Two JSONL record kinds feed this module: per-article political-bias
//! labels (left/center/right) and per-sentence quality categories scored
//! clean=3, mild_gibberish=2, word_salad=1, noise=0. Aggregation gives
//! per-generation bias proportions and the text quality index (mean
//! sentence score per article, articles weighted equally within a
//! generation), both shaped as [`Series`] for the trajectory analyzer.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};
use thiserror::Error;

use crate::regression::Series;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("duplicate article record for generation {generation}, article `{article_id}`")]
    DuplicateArticle { generation: i64, article_id: String },
    #[error("no records for generation {generation}")]
    NoData { generation: i64 },
    #[error("no sentences for article `{article_id}` in generation {generation}")]
    NoSentences { generation: i64, article_id: String },
    #[error("generation coverage has gaps: missing {}", missing.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", "))]
    MissingGenerations { missing: Vec<i64> },
    #[error("no records at all")]
    Empty,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Political leaning assigned to one article.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasLabel {
    Left,
    Center,
    Right,
}

impl BiasLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            BiasLabel::Left => "left",
            BiasLabel::Center => "center",
            BiasLabel::Right => "right",
        }
    }
}

impl std::str::FromStr for BiasLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "left" => Ok(BiasLabel::Left),
            "center" => Ok(BiasLabel::Center),
            "right" => Ok(BiasLabel::Right),
            other => Err(format!("unknown side `{other}` (expected left|center|right)")),
        }
    }
}

/// Sentence coherence category, scored 3 down to 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QualityCategory {
    Clean,
    MildGibberish,
    WordSalad,
    Noise,
}

impl QualityCategory {
    pub fn score(&self) -> f64 {
        match self {
            QualityCategory::Clean => 3.0,
            QualityCategory::MildGibberish => 2.0,
            QualityCategory::WordSalad => 1.0,
            QualityCategory::Noise => 0.0,
        }
    }
}

/// One labeled article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArticleLabelRecord {
    pub generation: i64,
    pub article_id: String,
    pub label: BiasLabel,
}

/// One categorized sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceQualityRecord {
    pub generation: i64,
    pub article_id: String,
    pub sentence_index: usize,
    pub category: QualityCategory,
}

fn read_jsonl<T: serde::de::DeserializeOwned, R: Read>(reader: R) -> Result<Vec<T>, MetricsError> {
    let mut records = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(trimmed).map_err(|e| MetricsError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Read article labels from JSONL, enforcing (generation, article_id)
/// uniqueness.
pub fn read_article_labels<R: Read>(reader: R) -> Result<Vec<ArticleLabelRecord>, MetricsError> {
    let records: Vec<ArticleLabelRecord> = read_jsonl(reader)?;
    let mut seen = BTreeSet::new();
    for r in &records {
        if !seen.insert((r.generation, r.article_id.clone())) {
            return Err(MetricsError::DuplicateArticle {
                generation: r.generation,
                article_id: r.article_id.clone(),
            });
        }
    }
    Ok(records)
}

/// Read sentence quality records from JSONL.
pub fn read_sentence_quality<R: Read>(
    reader: R,
) -> Result<Vec<SentenceQualityRecord>, MetricsError> {
    read_jsonl(reader)
}

/// Per-generation label shares; always sums to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasProportions {
    pub left: f64,
    pub center: f64,
    pub right: f64,
}

impl BiasProportions {
    pub fn side(&self, side: BiasLabel) -> f64 {
        match side {
            BiasLabel::Left => self.left,
            BiasLabel::Center => self.center,
            BiasLabel::Right => self.right,
        }
    }
}

/// Label proportions over the articles of one generation.
pub fn bias_proportions(
    records: &[ArticleLabelRecord],
    generation: i64,
) -> Result<BiasProportions, MetricsError> {
    let mut counts = [0usize; 3];
    let mut total = 0usize;
    for r in records.iter().filter(|r| r.generation == generation) {
        let slot = match r.label {
            BiasLabel::Left => 0,
            BiasLabel::Center => 1,
            BiasLabel::Right => 2,
        };
        counts[slot] += 1;
        total += 1;
    }
    if total == 0 {
        return Err(MetricsError::NoData { generation });
    }
    let n = total as f64;
    Ok(BiasProportions {
        left: counts[0] as f64 / n,
        center: counts[1] as f64 / n,
        right: counts[2] as f64 / n,
    })
}

/// Text quality index of one article: mean sentence score, in [0, 3].
pub fn quality_index(
    records: &[SentenceQualityRecord],
    generation: i64,
    article_id: &str,
) -> Result<f64, MetricsError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in records
        .iter()
        .filter(|r| r.generation == generation && r.article_id == article_id)
    {
        sum += r.category.score();
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::NoSentences {
            generation,
            article_id: article_id.to_string(),
        });
    }
    Ok(sum / count as f64)
}

fn contiguous_generations<I: Iterator<Item = i64>>(gens: I) -> Result<Vec<i64>, MetricsError> {
    let present: BTreeSet<i64> = gens.collect();
    let (&lo, &hi) = match (present.first(), present.last()) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => return Err(MetricsError::Empty),
    };
    let missing: Vec<i64> = (lo..=hi).filter(|g| !present.contains(g)).collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingGenerations { missing });
    }
    Ok((lo..=hi).collect())
}

/// Per-generation proportion of articles labeled `side`, as a Series
/// labeled e.g. `right_prop`.
pub fn build_bias_series(
    records: &[ArticleLabelRecord],
    side: BiasLabel,
) -> Result<Series, MetricsError> {
    let generations = contiguous_generations(records.iter().map(|r| r.generation))?;
    let mut values = Vec::with_capacity(generations.len());
    for g in generations {
        values.push(bias_proportions(records, g)?.side(side));
    }
    Ok(Series::new(format!("{}_prop", side.as_str()), values))
}

/// Per-generation text quality index: the unweighted mean over articles
/// of each article's mean sentence score (articles weighted equally, not
/// sentences).
pub fn build_quality_series(records: &[SentenceQualityRecord]) -> Result<Series, MetricsError> {
    let generations = contiguous_generations(records.iter().map(|r| r.generation))?;
    let mut values = Vec::with_capacity(generations.len());
    for g in generations {
        let articles: BTreeSet<&str> = records
            .iter()
            .filter(|r| r.generation == g)
            .map(|r| r.article_id.as_str())
            .collect();
        let mut sum = 0.0;
        for a in &articles {
            sum += quality_index(records, g, a)?;
        }
        values.push(sum / articles.len() as f64);
    }
    Ok(Series::new("quality_index", values))
}

/// Per-generation article counts, useful for reporting.
pub fn generation_counts(records: &[ArticleLabelRecord]) -> BTreeMap<i64, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.generation).or_insert(0) += 1;
    }
    counts
}
