//! Gradient-descent toy model of bias amplification.
//!
//! Parameters θ decompose against a fixed unit bias direction u:
//! θ = θ_unbiased + θ_biased with θ_unbiased ⟂ u and θ_biased ∥ u. The
//! bias projection coefficient of a gradient g is
//!
//! ```text
//! c_t = (θ_biased / ‖θ_biased‖)ᵀ g
//! ```
//!
//! and the projected update rule keeps only that component of the step:
//!
//! ```text
//! θ_{t+1} = θ_unbiased + θ_biased − η (θ_biased / ‖θ_biased‖) c_t
//! ```
//!
//! so each step changes the bias magnitude by exactly −η c_t (when the
//! step does not push θ_biased through zero): a negative coefficient
//! amplifies the bias. The full-gradient rule θ_{t+1} = θ_t − η g is also
//! provided since the projected rule silently discards the orthogonal
//! gradient component; trajectories report the same per-step quantities
//! for either rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("bias direction has norm {norm}, expected 1 within 1e-12")]
    NonUnitDirection { norm: f64 },
    #[error("vector length {got} does not match dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("bias coefficient undefined: biased component is zero")]
    ZeroBiasComponent,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<ProjectionError>,
    },
}

/// Which update rule a trajectory iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// The projected rule: only the bias-parallel component of the step.
    Projected,
    /// Plain gradient descent.
    FullGradient,
}

/// Gradient source for a trajectory.
///
/// The quadratic loss ½(θ−θ*)ᵀD(θ−θ*) (D a positive diagonal) makes the
/// sign predictions provable and finite-difference checks exact to
/// machine noise; the linear loss gᵀθ supplies a constant gradient for
/// plug-in scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossSpec {
    Quadratic { target: Vec<f64>, scale: Vec<f64> },
    Linear { gradient: Vec<f64> },
}

impl LossSpec {
    fn check_dim(&self, dim: usize) -> Result<(), ProjectionError> {
        let (len, name) = match self {
            LossSpec::Quadratic { target, scale } => {
                if scale.len() != dim {
                    return Err(ProjectionError::DimensionMismatch {
                        expected: dim,
                        got: scale.len(),
                    });
                }
                if scale.iter().any(|&d| !(d > 0.0) || !d.is_finite()) {
                    return Err(ProjectionError::Config(
                        "quadratic scale entries must be positive and finite".into(),
                    ));
                }
                (target.len(), "target")
            }
            LossSpec::Linear { gradient } => (gradient.len(), "gradient"),
        };
        if len != dim {
            return Err(ProjectionError::Config(format!(
                "{name} has length {len}, expected {dim}"
            )));
        }
        Ok(())
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        match self {
            LossSpec::Quadratic { target, scale } => theta
                .iter()
                .zip(target)
                .zip(scale)
                .map(|((t, ts), d)| d * (t - ts))
                .collect(),
            LossSpec::Linear { gradient } => gradient.clone(),
        }
    }

    pub fn loss(&self, theta: &[f64]) -> f64 {
        match self {
            LossSpec::Quadratic { target, scale } => {
                0.5 * theta
                    .iter()
                    .zip(target)
                    .zip(scale)
                    .map(|((t, ts), d)| d * (t - ts) * (t - ts))
                    .sum::<f64>()
            }
            LossSpec::Linear { gradient } => dot(gradient, theta),
        }
    }
}

/// Configuration of a projection trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectionConfig {
    pub dim: usize,
    /// Unit bias direction; rejected unless ‖u‖ = 1 within 1e-12.
    pub u: Vec<f64>,
    /// Learning rate, must be positive.
    pub eta: f64,
    pub loss: LossSpec,
    pub steps: usize,
    pub rule: UpdateRule,
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<(), ProjectionError> {
        check_unit(&self.u)?;
        if self.u.len() != self.dim {
            return Err(ProjectionError::DimensionMismatch {
                expected: self.dim,
                got: self.u.len(),
            });
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(ProjectionError::Config(format!(
                "eta must be positive and finite, got {}",
                self.eta
            )));
        }
        self.loss.check_dim(self.dim)
    }
}

/// Parameters decomposed against the bias direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionState {
    pub theta: Vec<f64>,
    pub theta_unbiased: Vec<f64>,
    pub theta_biased: Vec<f64>,
    /// ‖θ_biased‖, the bias measure.
    pub bias_magnitude: f64,
    /// Coefficient used by the most recent update, if any.
    pub last_coefficient: Option<f64>,
}

impl ProjectionState {
    /// Decompose `theta` against the unit direction `u`.
    pub fn decompose(theta: &[f64], u: &[f64]) -> Result<Self, ProjectionError> {
        let (theta_unbiased, theta_biased) = decompose(theta, u)?;
        let bias_magnitude = norm(&theta_biased);
        Ok(Self {
            theta: theta.to_vec(),
            theta_unbiased,
            theta_biased,
            bias_magnitude,
            last_coefficient: None,
        })
    }
}

/// Split `theta` into (unbiased, biased) parts: biased = (θ·u)u.
pub fn decompose(theta: &[f64], u: &[f64]) -> Result<(Vec<f64>, Vec<f64>), ProjectionError> {
    check_unit(u)?;
    if theta.len() != u.len() {
        return Err(ProjectionError::DimensionMismatch {
            expected: u.len(),
            got: theta.len(),
        });
    }
    let proj = dot(theta, u);
    let biased: Vec<f64> = u.iter().map(|ui| proj * ui).collect();
    let unbiased: Vec<f64> = theta.iter().zip(&biased).map(|(t, b)| t - b).collect();
    Ok((unbiased, biased))
}

/// Bias projection coefficient c_t = (θ_biased/‖θ_biased‖)ᵀ g.
pub fn bias_coefficient(state: &ProjectionState, gradient: &[f64]) -> Result<f64, ProjectionError> {
    if gradient.len() != state.theta.len() {
        return Err(ProjectionError::DimensionMismatch {
            expected: state.theta.len(),
            got: gradient.len(),
        });
    }
    if state.bias_magnitude == 0.0 {
        return Err(ProjectionError::ZeroBiasComponent);
    }
    Ok(dot(&state.theta_biased, gradient) / state.bias_magnitude)
}

/// Result of a single update: the new state, the coefficient used, and
/// whether the step pushed the biased component through zero.
#[derive(Debug, Clone)]
pub struct UpdateOutcome {
    pub state: ProjectionState,
    pub c_t: f64,
    pub flipped: bool,
}

/// The projected rule: θ' = θ_unbiased + θ_biased − η (θ_biased/‖θ_biased‖) c_t.
///
/// Only the bias-parallel component moves, so the unbiased part carries
/// over unchanged and Δ‖θ_biased‖ = −η c_t whenever no sign flip occurs.
/// A step large enough to cross zero is taken literally and flagged.
pub fn projected_update(
    state: &ProjectionState,
    gradient: &[f64],
    eta: f64,
) -> Result<UpdateOutcome, ProjectionError> {
    let c_t = bias_coefficient(state, gradient)?;
    let unit: Vec<f64> = state
        .theta_biased
        .iter()
        .map(|b| b / state.bias_magnitude)
        .collect();
    let theta_biased: Vec<f64> = state
        .theta_biased
        .iter()
        .zip(&unit)
        .map(|(b, e)| b - eta * c_t * e)
        .collect();
    let theta: Vec<f64> = state
        .theta_unbiased
        .iter()
        .zip(&theta_biased)
        .map(|(a, b)| a + b)
        .collect();
    let flipped = eta * c_t > state.bias_magnitude;
    Ok(UpdateOutcome {
        state: ProjectionState {
            theta,
            theta_unbiased: state.theta_unbiased.clone(),
            bias_magnitude: norm(&theta_biased),
            theta_biased,
            last_coefficient: Some(c_t),
        },
        c_t,
        flipped,
    })
}

/// Plain gradient descent θ' = θ − η g, re-decomposed against `u`.
pub fn full_gradient_update(
    state: &ProjectionState,
    u: &[f64],
    gradient: &[f64],
    eta: f64,
) -> Result<ProjectionState, ProjectionError> {
    if gradient.len() != state.theta.len() {
        return Err(ProjectionError::DimensionMismatch {
            expected: state.theta.len(),
            got: gradient.len(),
        });
    }
    let theta: Vec<f64> = state
        .theta
        .iter()
        .zip(gradient)
        .map(|(t, g)| t - eta * g)
        .collect();
    let mut next = ProjectionState::decompose(&theta, u)?;
    // Diagnostic coefficient at the pre-step state; undefined when the
    // biased component is zero, which the full rule tolerates.
    next.last_coefficient = bias_coefficient(state, gradient).ok();
    Ok(next)
}

/// One row of a trajectory: quantities after executing `step`.
#[derive(Debug, Clone, Serialize)]
pub struct StepRecord {
    pub step: usize,
    /// Coefficient used by this step (NaN when undefined under the full
    /// rule).
    pub c_t: f64,
    pub bias_magnitude: f64,
    pub loss: f64,
    pub flipped: bool,
    pub state: ProjectionState,
}

/// A full trajectory: the initial decomposition plus one record per step.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionTrajectory {
    pub initial: ProjectionState,
    pub steps: Vec<StepRecord>,
}

impl ProjectionTrajectory {
    pub fn final_state(&self) -> &ProjectionState {
        self.steps.last().map_or(&self.initial, |s| &s.state)
    }

    /// Trajectory CSV: `step,c_t,bias_magnitude,loss,flip_flag`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,c_t,bias_magnitude,loss,flip_flag")?;
        for s in &self.steps {
            writeln!(
                w,
                "{},{},{},{},{}",
                s.step, s.c_t, s.bias_magnitude, s.loss, s.flipped as u8
            )?;
        }
        Ok(())
    }
}

/// Iterate the configured rule from `initial_theta` for `config.steps`
/// steps. Errors are annotated with the 1-based step index.
pub fn run_projection_sim(
    config: &ProjectionConfig,
    initial_theta: &[f64],
) -> Result<ProjectionTrajectory, ProjectionError> {
    config.validate()?;
    if initial_theta.len() != config.dim {
        return Err(ProjectionError::DimensionMismatch {
            expected: config.dim,
            got: initial_theta.len(),
        });
    }
    let initial = ProjectionState::decompose(initial_theta, &config.u)?;
    let mut current = initial.clone();
    let mut steps = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let gradient = config.loss.gradient(&current.theta);
        let at_step = |source: ProjectionError| ProjectionError::AtStep {
            step,
            source: Box::new(source),
        };
        let (state, c_t, flipped) = match config.rule {
            UpdateRule::Projected => {
                let out = projected_update(&current, &gradient, config.eta).map_err(at_step)?;
                (out.state, out.c_t, out.flipped)
            }
            UpdateRule::FullGradient => {
                let state = full_gradient_update(&current, &config.u, &gradient, config.eta)
                    .map_err(at_step)?;
                let c_t = state.last_coefficient.unwrap_or(f64::NAN);
                (state, c_t, false)
            }
        };
        steps.push(StepRecord {
            step,
            c_t,
            bias_magnitude: state.bias_magnitude,
            loss: config.loss.loss(&state.theta),
            flipped,
            state: state.clone(),
        });
        current = state;
    }
    Ok(ProjectionTrajectory { initial, steps })
}

fn check_unit(u: &[f64]) -> Result<(), ProjectionError> {
    let norm = norm(u);
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(ProjectionError::NonUnitDirection { norm });
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
