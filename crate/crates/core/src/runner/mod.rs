//! Command implementations behind the `driftlab` binary.
//!
//! Each command reads an optional JSON config, applies flag overrides,
//! runs the corresponding library entry point, and writes its outputs
//! plus a run manifest into the output directory. Data files are written
//! atomically (write-then-rename) and carry no timestamps, so re-running
//! with the same config and seed reproduces them byte for byte; the
//! manifest records a SHA-256 digest of every emitted file and is
//! written last.

use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

use crate::metrics::{self, BiasLabel, MetricsError};
use crate::projection::{self, LossSpec, ProjectionConfig, ProjectionError, UpdateRule};
use crate::sim::{self, Mitigation, Mode, SimConfig, SimError};
use crate::stats::{BetaParams, SeedSpec, StatsError};
use crate::trajectory::{self, OutcomeSection, SignificanceReport, TrajectoryError, TrajectoryMatrix};

/// Errors classified by exit code: config 2, data 3, numeric 4.
#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl RunnerError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunnerError::Config(_) => 2,
            RunnerError::Data(_) => 3,
            RunnerError::Numeric(_) => 4,
        }
    }
}

impl From<std::io::Error> for RunnerError {
    fn from(e: std::io::Error) -> Self {
        RunnerError::Data(e.to_string())
    }
}

impl From<SimError> for RunnerError {
    fn from(e: SimError) -> Self {
        match &e {
            SimError::Config(_) | SimError::Compose(_) => RunnerError::Config(e.to_string()),
            SimError::Fit { .. } | SimError::Unconverged { .. } => {
                RunnerError::Numeric(e.to_string())
            }
            SimError::Stats(_) => RunnerError::Data(e.to_string()),
        }
    }
}

impl From<ProjectionError> for RunnerError {
    fn from(e: ProjectionError) -> Self {
        match &e {
            ProjectionError::AtStep { .. } | ProjectionError::ZeroBiasComponent => {
                RunnerError::Numeric(e.to_string())
            }
            _ => RunnerError::Config(e.to_string()),
        }
    }
}

impl From<TrajectoryError> for RunnerError {
    fn from(e: TrajectoryError) -> Self {
        match &e {
            TrajectoryError::BadThreshold(_) | TrajectoryError::Fixture(_) => {
                RunnerError::Config(e.to_string())
            }
            _ => RunnerError::Data(e.to_string()),
        }
    }
}

impl From<MetricsError> for RunnerError {
    fn from(e: MetricsError) -> Self {
        RunnerError::Data(e.to_string())
    }
}

impl From<StatsError> for RunnerError {
    fn from(e: StatsError) -> Self {
        RunnerError::Data(e.to_string())
    }
}

/// Top-level JSON config file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<SeedSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection: Option<ProjectionSection>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, RunnerError> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| RunnerError::Config(format!("cannot read {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| RunnerError::Config(format!("{}: {e}", p.display())))
            }
        }
    }
}

/// `sim` section: a [`SimConfig`] without the seed (which is top-level).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub pretrain: BetaParams,
    pub target: BetaParams,
    pub n_samples: usize,
    pub generations: usize,
    pub mode: Mode,
    pub mitigation: Mitigation,
    pub preserve_fraction: f64,
}

impl Default for SimSection {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            pretrain: d.pretrain,
            target: d.target,
            n_samples: d.n_samples,
            generations: d.generations,
            mode: d.mode,
            mitigation: d.mitigation,
            preserve_fraction: d.preserve_fraction,
        }
    }
}

impl SimSection {
    fn into_config(self, seed: SeedSpec) -> SimConfig {
        SimConfig {
            pretrain: self.pretrain,
            target: self.target,
            n_samples: self.n_samples,
            generations: self.generations,
            mode: self.mode,
            mitigation: self.mitigation,
            preserve_fraction: self.preserve_fraction,
            seed,
        }
    }
}

/// `projection` section: trajectory config plus the starting point.
/// Defaults to the constant-gradient plug-in scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProjectionSection {
    pub dim: usize,
    pub u: Vec<f64>,
    pub eta: f64,
    pub loss: LossSpec,
    pub steps: usize,
    pub rule: UpdateRule,
    pub initial_theta: Vec<f64>,
}

impl Default for ProjectionSection {
    fn default() -> Self {
        Self {
            dim: 2,
            u: vec![1.0, 0.0],
            eta: 0.1,
            loss: LossSpec::Linear {
                gradient: vec![-1.0, 0.0],
            },
            steps: 3,
            rule: UpdateRule::Projected,
            initial_theta: vec![2.0, 0.0],
        }
    }
}

impl ProjectionSection {
    fn config(&self) -> ProjectionConfig {
        ProjectionConfig {
            dim: self.dim,
            u: self.u.clone(),
            eta: self.eta,
            loss: self.loss.clone(),
            steps: self.steps,
            rule: self.rule,
        }
    }
}

#[derive(Debug, Serialize)]
struct OutputEntry {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    command: String,
    master_seed: u64,
    config: serde_json::Value,
    started_at: String,
    finished_at: String,
    wall_time_seconds: f64,
    outputs: Vec<OutputEntry>,
}

/// Collects outputs and writes the manifest last.
struct RunWriter {
    out_dir: PathBuf,
    command: String,
    master_seed: u64,
    config: serde_json::Value,
    started_at: String,
    clock: Instant,
    outputs: Vec<OutputEntry>,
}

impl RunWriter {
    fn begin(
        out_dir: &Path,
        command: &str,
        master_seed: u64,
        config: serde_json::Value,
    ) -> Result<Self, RunnerError> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            master_seed,
            config,
            started_at: Utc::now().to_rfc3339(),
            clock: Instant::now(),
            outputs: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunnerError> {
        let path = self.out_dir.join(name);
        atomic_write(&path, bytes)?;
        self.outputs.push(OutputEntry {
            path: name.to_string(),
            sha256: hex_digest(bytes),
            bytes: bytes.len(),
        });
        Ok(())
    }

    fn finish(self) -> Result<(), RunnerError> {
        let manifest = RunManifest {
            tool: "driftlab",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            master_seed: self.master_seed,
            config: self.config,
            started_at: self.started_at,
            finished_at: Utc::now().to_rfc3339(),
            wall_time_seconds: self.clock.elapsed().as_secs_f64(),
            outputs: self.outputs,
        };
        let bytes = serde_json::to_vec_pretty(&manifest)
            .map_err(|e| RunnerError::Data(e.to_string()))?;
        atomic_write(&self.out_dir.join("manifest.json"), &bytes)
    }
}

fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), RunnerError> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn effective_seed(file_seed: Option<SeedSpec>, flag_seed: Option<u64>) -> SeedSpec {
    let mut seed = file_seed.unwrap_or_default();
    if let Some(master) = flag_seed {
        seed.master_seed = master;
    }
    seed
}

/// Overrides shared by `simulate` and `collapse`.
#[derive(Debug, Clone, Default)]
pub struct SimOverrides {
    pub mode: Option<Mode>,
    pub generations: Option<usize>,
    pub n_samples: Option<usize>,
    pub mitigation: Option<Mitigation>,
    pub preserve_fraction: Option<f64>,
}

impl SimOverrides {
    fn apply(&self, mut section: SimSection) -> SimSection {
        if let Some(mode) = self.mode {
            section.mode = mode;
        }
        if let Some(generations) = self.generations {
            section.generations = generations;
        }
        if let Some(n_samples) = self.n_samples {
            section.n_samples = n_samples;
        }
        if let Some(mitigation) = self.mitigation {
            section.mitigation = mitigation;
        }
        if let Some(fraction) = self.preserve_fraction {
            section.preserve_fraction = fraction;
        }
        section
    }
}

/// Number of grid points in the per-generation density CSVs.
const PDF_GRID_POINTS: usize = 512;

/// Run one generational simulation; emit the trace CSV, per-generation
/// density grids, and the manifest.
pub fn simulate(
    config_path: Option<&Path>,
    out_dir: &Path,
    seed_flag: Option<u64>,
    overrides: &SimOverrides,
) -> Result<(), RunnerError> {
    let file = RunConfig::load(config_path)?;
    let seed = effective_seed(file.seed, seed_flag);
    let section = overrides.apply(file.sim.unwrap_or_default());
    let config = section.into_config(seed.clone());
    config.validate()?;

    let trace = sim::run_sim(&config)?;

    let echo = serde_json::to_value(&config).map_err(|e| RunnerError::Data(e.to_string()))?;
    let mut writer = RunWriter::begin(out_dir, "simulate", seed.master_seed, echo)?;
    let mut csv = Vec::new();
    trace.write_csv(&mut csv)?;
    writer.write("trace.csv", &csv)?;
    for record in &trace.records {
        let name = pdf_grid_name(record.gen_index);
        writer.write(&name, &pdf_grid_csv(&record.fitted)?)?;
    }
    writer.finish()
}

fn pdf_grid_name(gen_index: i32) -> String {
    if gen_index < 0 {
        "pdf_pre.csv".to_string()
    } else {
        format!("pdf_gen_{gen_index:02}.csv")
    }
}

fn pdf_grid_csv(params: &BetaParams) -> Result<Vec<u8>, RunnerError> {
    use std::io::Write;
    let mut buf = Vec::new();
    writeln!(buf, "x,density").map_err(RunnerError::from)?;
    for i in 0..PDF_GRID_POINTS {
        let x = (i as f64 + 0.5) / PDF_GRID_POINTS as f64;
        let density = params.pdf(x)?;
        writeln!(buf, "{x},{density}").map_err(RunnerError::from)?;
    }
    Ok(buf)
}

/// Run a replicated collapse ensemble; when a mitigation policy is
/// configured, also run the unmitigated baseline and emit a comparison.
pub fn collapse(
    config_path: Option<&Path>,
    out_dir: &Path,
    seed_flag: Option<u64>,
    overrides: &SimOverrides,
    replications: usize,
) -> Result<(), RunnerError> {
    let file = RunConfig::load(config_path)?;
    let seed = effective_seed(file.seed, seed_flag);
    let section = overrides.apply(file.sim.unwrap_or_default());
    let config = section.into_config(seed.clone());
    config.validate()?;

    let ensemble = sim::run_collapse_sim(&config, replications)?;
    let baseline = if config.mitigation != Mitigation::None {
        let base_config = SimConfig {
            mitigation: Mitigation::None,
            ..config.clone()
        };
        Some(sim::run_collapse_sim(&base_config, replications)?)
    } else {
        None
    };

    let echo = json!({
        "sim": serde_json::to_value(&config).map_err(|e| RunnerError::Data(e.to_string()))?,
        "replications": replications,
    });
    let mut writer = RunWriter::begin(out_dir, "collapse", seed.master_seed, echo)?;
    for (r, trace) in ensemble.traces.iter().enumerate() {
        let mut csv = Vec::new();
        trace.write_csv(&mut csv)?;
        writer.write(&format!("trace_rep{r:03}.csv"), &csv)?;
    }
    writer.write("dispersion.csv", &dispersion_csv(&ensemble.dispersion))?;
    if let Some(base) = &baseline {
        writer.write("dispersion_baseline.csv", &dispersion_csv(&base.dispersion))?;
        let final_mitigated = *ensemble.dispersion.last().unwrap();
        let final_baseline = *base.dispersion.last().unwrap();
        let comparison = json!({
            "mitigation": config.mitigation.to_string(),
            "final_dispersion_mitigated": final_mitigated,
            "final_dispersion_baseline": final_baseline,
            "dispersion_reduced": final_mitigated < final_baseline,
        });
        writer.write(
            "comparison.json",
            &serde_json::to_vec_pretty(&comparison).map_err(|e| RunnerError::Data(e.to_string()))?,
        )?;
    }
    writer.finish()
}

fn dispersion_csv(dispersion: &[f64]) -> Vec<u8> {
    use std::io::Write;
    let mut buf = Vec::new();
    writeln!(buf, "gen,dispersion").unwrap();
    for (g, d) in dispersion.iter().enumerate() {
        writeln!(buf, "{g},{d}").unwrap();
    }
    buf
}

/// Run the projection toy model; emit the trajectory CSV.
pub fn project(
    config_path: Option<&Path>,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), RunnerError> {
    let file = RunConfig::load(config_path)?;
    let seed = effective_seed(file.seed, seed_flag);
    let section = file.projection.unwrap_or_default();
    let config = section.config();
    config.validate()?;

    let trajectory = projection::run_projection_sim(&config, &section.initial_theta)?;

    let echo = serde_json::to_value(&section).map_err(|e| RunnerError::Data(e.to_string()))?;
    let mut writer = RunWriter::begin(out_dir, "project", seed.master_seed, echo)?;
    let mut csv = Vec::new();
    trajectory.write_csv(&mut csv)?;
    writer.write("trajectory.csv", &csv)?;
    writer.finish()
}

/// Options for [`analyze`].
#[derive(Debug, Clone)]
pub struct AnalyzeOpts {
    pub trajectories: PathBuf,
    pub outcome: String,
    /// `None` selects the rule-of-thumb lag.
    pub lag: Option<usize>,
    pub threshold: f64,
    pub compare: Option<String>,
    pub mask: Option<PathBuf>,
}

/// Bulk-analyze a trajectory file: one regression per signal, a
/// significance report, and optionally an overlap section against a
/// second outcome.
pub fn analyze(opts: &AnalyzeOpts, out_dir: &Path, seed_flag: Option<u64>) -> Result<(), RunnerError> {
    let mut matrix = TrajectoryMatrix::from_csv_path(&opts.trajectories)?;
    if let Some(mask_path) = &opts.mask {
        let mask: BTreeSet<usize> =
            trajectory::load_round_boundary_mask(std::fs::File::open(mask_path)?)?;
        matrix.set_round_boundary(mask)?;
    }

    let echo = json!({
        "trajectories": opts.trajectories.display().to_string(),
        "outcome": opts.outcome,
        "lag": opts.lag,
        "threshold": opts.threshold,
        "compare": opts.compare,
        "mask": opts.mask.as_ref().map(|p| p.display().to_string()),
    });
    let mut writer = RunWriter::begin(out_dir, "analyze", seed_flag.unwrap_or(0), echo)?;

    let mut outcomes = std::collections::BTreeMap::new();
    let results = trajectory::analyze_all(&matrix, &opts.outcome, opts.lag)?;
    let mut csv = Vec::new();
    trajectory::write_results_csv(&results, &mut csv)?;
    writer.write(&format!("results_{}.csv", opts.outcome), &csv)?;
    let section = OutcomeSection::build(&results, opts.threshold)?;
    let set_a = section.significant_names();
    outcomes.insert(opts.outcome.clone(), section);

    let overlap = match &opts.compare {
        Some(other) => {
            let other_results = trajectory::analyze_all(&matrix, other, opts.lag)?;
            let mut csv = Vec::new();
            trajectory::write_results_csv(&other_results, &mut csv)?;
            writer.write(&format!("results_{other}.csv"), &csv)?;
            let other_section = OutcomeSection::build(&other_results, opts.threshold)?;
            let set_b = other_section.significant_names();
            outcomes.insert(other.clone(), other_section);
            Some(trajectory::overlap_report(
                &set_a,
                &set_b,
                matrix.n_signals(),
            )?)
        }
        None => None,
    };

    let report = SignificanceReport {
        threshold: opts.threshold,
        outcomes,
        overlap,
    };
    writer.write(
        "report.json",
        &serde_json::to_vec_pretty(&report).map_err(|e| RunnerError::Data(e.to_string()))?,
    )?;
    writer.finish()
}

/// What [`aggregate`] builds from a label file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregateKind {
    Bias(BiasLabel),
    Quality,
}

/// Aggregate a JSONL label file into a per-generation outcome series CSV.
pub fn aggregate(
    labels: &Path,
    kind: AggregateKind,
    out_dir: &Path,
    seed_flag: Option<u64>,
) -> Result<(), RunnerError> {
    use std::io::Write;
    let file = std::fs::File::open(labels)?;
    let (label, first_generation, values) = match kind {
        AggregateKind::Bias(side) => {
            let records = metrics::read_article_labels(file)?;
            let first = records.iter().map(|r| r.generation).min();
            let series = metrics::build_bias_series(&records, side)?;
            (series.label, first, series.values)
        }
        AggregateKind::Quality => {
            let records = metrics::read_sentence_quality(file)?;
            let first = records.iter().map(|r| r.generation).min();
            let series = metrics::build_quality_series(&records)?;
            (series.label, first, series.values)
        }
    };
    let first_generation = first_generation.ok_or_else(|| RunnerError::Data("no records".into()))?;

    let echo = json!({
        "labels": labels.display().to_string(),
        "kind": label,
    });
    let mut writer = RunWriter::begin(out_dir, "aggregate", seed_flag.unwrap_or(0), echo)?;
    let mut buf = Vec::new();
    writeln!(buf, "generation,value").map_err(RunnerError::from)?;
    for (i, v) in values.iter().enumerate() {
        writeln!(buf, "{},{v}", first_generation + i as i64).map_err(RunnerError::from)?;
    }
    writer.write(&format!("series_{label}.csv"), &buf)?;
    writer.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_class() {
        assert_eq!(RunnerError::Config("x".into()).exit_code(), 2);
        assert_eq!(RunnerError::Data("x".into()).exit_code(), 3);
        assert_eq!(RunnerError::Numeric("x".into()).exit_code(), 4);
    }

    #[test]
    fn sim_error_classification() {
        assert_eq!(
            RunnerError::from(SimError::Config("bad".into())).exit_code(),
            2
        );
        let partial = Box::new(crate::sim::SimTrace {
            config: SimConfig::default(),
            records: vec![],
        });
        assert_eq!(
            RunnerError::from(SimError::Unconverged { gen: 3, partial }).exit_code(),
            4
        );
    }

    #[test]
    fn config_parse_error_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{\n  \"sim\": {\n").unwrap();
        let err = RunConfig::load(Some(&path)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "message was: {msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_config_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        std::fs::write(&path, r#"{"sim": {"n_sample": 10}}"#).unwrap();
        let err = RunConfig::load(Some(&path)).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(
            hex_digest(b"driftlab"),
            hex_digest(b"driftlab"),
        );
        assert_eq!(hex_digest(b"").len(), 64);
    }
}
