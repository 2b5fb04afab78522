//! The control for the drift experiment: identical generational loop
//! but with plain (unweighted) maximum likelihood. With large samples
//! every generation re-estimates the target distribution and the fitted
//! mean stays pinned at 0.5 — no inherited tilt, no drift.
//!
//! Run with: cargo run --release --example mle_control

use driftlab::sim::{run_sim, Mode, SimConfig};
use driftlab::stats::SeedSpec;

fn main() {
    let config = SimConfig {
        mode: Mode::Mle,
        seed: SeedSpec::new(42, "mle-control-example"),
        ..SimConfig::default()
    };
    let trace = run_sim(&config).expect("simulation failed");

    println!("{:>4} {:>8} {:>14}", "gen", "mean", "concentration");
    for r in &trace.records {
        println!(
            "{:>4} {:>8.5} {:>14.2}",
            r.gen_index, r.fitted_mean, r.fitted_concentration
        );
    }

    let worst = trace
        .generation_records()
        .map(|r| (r.fitted_mean - 0.5).abs())
        .fold(0.0f64, f64::max);
    println!("\nlargest deviation of any generation from 0.5: {worst:.5}");
}
