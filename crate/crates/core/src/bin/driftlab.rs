//! Thin command-line front end over the `driftlab` library: the same
//! capabilities the `examples/` directory shows, driven by a JSON config
//! and flags. Exit codes: 0 ok, 2 config error, 3 data error, 4
//! numeric/convergence error.

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use driftlab::metrics::BiasLabel;
use driftlab::runner::{self, AggregateKind, AnalyzeOpts, SimOverrides};
use driftlab::sim::{Mitigation, Mode};

#[derive(Parser)]
#[command(name = "driftlab", version, about = "Generational-drift simulations and trajectory analysis")]
struct Cli {
    /// JSON config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for data files and the run manifest.
    #[arg(long, global = true, default_value = "driftlab-out")]
    out_dir: PathBuf,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SimFlags {
    /// Fitting mode: wmle | mle.
    #[arg(long)]
    mode: Option<Mode>,
    /// Number of synthetic rounds after round 0.
    #[arg(long)]
    generations: Option<usize>,
    /// Sample size of every drawn dataset.
    #[arg(long)]
    n_samples: Option<usize>,
    /// Dataset policy: none | preservation | accumulation.
    #[arg(long)]
    mitigation: Option<Mitigation>,
    /// Fraction replaced by real data under preservation.
    #[arg(long)]
    preserve_fraction: Option<f64>,
}

impl SimFlags {
    fn overrides(&self) -> SimOverrides {
        SimOverrides {
            mode: self.mode,
            generations: self.generations,
            n_samples: self.n_samples,
            mitigation: self.mitigation,
            preserve_fraction: self.preserve_fraction,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one generational simulation and export its trace.
    Simulate {
        #[command(flatten)]
        flags: SimFlags,
    },
    /// Run a replicated small-sample ensemble and measure dispersion.
    Collapse {
        #[command(flatten)]
        flags: SimFlags,
        /// Independent replications (at least 2).
        #[arg(long, default_value_t = 100)]
        replications: usize,
    },
    /// Run the gradient-projection toy model.
    Project,
    /// Regress every signal of a trajectory CSV against an outcome.
    Analyze {
        /// Trajectory CSV (`version,y:<outcome>…,x:<signal>…`).
        trajectories: PathBuf,
        /// Outcome column to analyze.
        #[arg(long)]
        outcome: String,
        /// Newey-West lag: an integer or `auto`.
        #[arg(long, default_value = "auto")]
        lag: String,
        /// Two-sided p-value threshold.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
        /// Second outcome; adds an overlap section to the report.
        #[arg(long)]
        compare: Option<String>,
        /// Sidecar file of transition indices to exclude.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Aggregate a JSONL label file into an outcome series.
    Aggregate {
        /// JSONL records: article labels (bias) or sentence quality.
        labels: PathBuf,
        /// What to build: bias | quality.
        #[arg(long)]
        kind: String,
        /// Side for bias series: left | center | right.
        #[arg(long, default_value = "right")]
        side: BiasLabel,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { flags } => runner::simulate(
            cli.config.as_deref(),
            &cli.out_dir,
            cli.seed,
            &flags.overrides(),
        ),
        Command::Collapse {
            flags,
            replications,
        } => runner::collapse(
            cli.config.as_deref(),
            &cli.out_dir,
            cli.seed,
            &flags.overrides(),
            *replications,
        ),
        Command::Project => runner::project(cli.config.as_deref(), &cli.out_dir, cli.seed),
        Command::Analyze {
            trajectories,
            outcome,
            lag,
            threshold,
            compare,
            mask,
        } => parse_lag(lag).and_then(|lag| {
            runner::analyze(
                &AnalyzeOpts {
                    trajectories: trajectories.clone(),
                    outcome: outcome.clone(),
                    lag,
                    threshold: *threshold,
                    compare: compare.clone(),
                    mask: mask.clone(),
                },
                &cli.out_dir,
                cli.seed,
            )
        }),
        Command::Aggregate { labels, kind, side } => parse_kind(kind, *side)
            .and_then(|kind| runner::aggregate(labels, kind, &cli.out_dir, cli.seed)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("driftlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn parse_lag(lag: &str) -> Result<Option<usize>, runner::RunnerError> {
    if lag == "auto" {
        return Ok(None);
    }
    lag.parse::<usize>().map(Some).map_err(|_| {
        runner::RunnerError::Config(format!("--lag must be `auto` or an integer, got `{lag}`"))
    })
}

fn parse_kind(kind: &str, side: BiasLabel) -> Result<AggregateKind, runner::RunnerError> {
    match kind {
        "bias" => Ok(AggregateKind::Bias(side)),
        "quality" => Ok(AggregateKind::Quality),
        other => Err(runner::RunnerError::Config(format!(
            "--kind must be bias or quality, got `{other}`"
        ))),
    }
}
