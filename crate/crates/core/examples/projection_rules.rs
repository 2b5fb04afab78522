//! The bias-projection toy model: when the loss gradient has a negative
//! projection onto the normalized biased parameter component (c_t < 0),
//! the projected update grows the bias magnitude by exactly −η·c_t per
//! step.
//!
//! Three scenarios: the constant-gradient plug-in case, a quadratic loss
//! whose target is more biased than the start (amplification all the way
//! down), and the same quadratic under plain gradient descent for
//! contrast.
//!
//! Run with: cargo run --example projection_rules

use driftlab::projection::{run_projection_sim, LossSpec, ProjectionConfig, UpdateRule};

fn print_trajectory(title: &str, config: &ProjectionConfig, theta0: &[f64]) {
    let traj = run_projection_sim(config, theta0).expect("projection failed");
    println!("\n{title}");
    println!("{:>5} {:>10} {:>16} {:>12} {:>5}", "step", "c_t", "bias_magnitude", "loss", "flip");
    for s in &traj.steps {
        println!(
            "{:>5} {:>10.5} {:>16.6} {:>12.5} {:>5}",
            s.step, s.c_t, s.bias_magnitude, s.loss, s.flipped
        );
    }
}

fn main() {
    let plug_in = ProjectionConfig {
        dim: 2,
        u: vec![1.0, 0.0],
        eta: 0.1,
        loss: LossSpec::Linear {
            gradient: vec![-1.0, 0.0],
        },
        steps: 3,
        rule: UpdateRule::Projected,
    };
    print_trajectory(
        "constant gradient (-1, 0), eta 0.1: magnitude climbs 2.1, 2.2, 2.3",
        &plug_in,
        &[2.0, 0.0],
    );

    let quadratic = LossSpec::Quadratic {
        target: vec![3.0, 0.5],
        scale: vec![1.0, 1.0],
    };
    let projected = ProjectionConfig {
        dim: 2,
        u: vec![1.0, 0.0],
        eta: 0.2,
        loss: quadratic.clone(),
        steps: 10,
        rule: UpdateRule::Projected,
    };
    print_trajectory(
        "quadratic loss, target more biased than start, projected rule: c_t < 0 throughout",
        &projected,
        &[1.0, 0.5],
    );

    let full = ProjectionConfig {
        rule: UpdateRule::FullGradient,
        ..projected
    };
    print_trajectory(
        "same quadratic, full-gradient rule: converges to the target instead",
        &full,
        &[1.0, 0.5],
    );
}
