//! Maximum-likelihood and weighted-maximum-likelihood Beta fitting.
//!
//! The weighted log-likelihood of Beta(α, β) on data x with weights w is
//!
//! ```text
//! L(α, β) = Σ_i w_i [(α−1) ln x_i + (β−1) ln(1−x_i)] − (Σ_i w_i) ln B(α, β)
//! ```
//!
//! which depends on the data only through three sufficient statistics,
//! so every optimizer iteration is O(1) after a single pass. The
//! maximizer runs damped Newton on (ln α, ln β) — positivity comes for
//! free from the parameterization — with a backtracking line search that
//! never accepts a decrease, starting from a weighted method-of-moments
//! estimate. Weights are normalized to mean 1 before optimization, which
//! changes conditioning but provably not the argmax, and the objective
//! is scaled by 1/Σw so the convergence tolerances are per-datum and
//! independent of sample size.

use serde::Serialize;
use thiserror::Error;

use crate::special::{digamma, ln_beta, trigamma};
use crate::stats::{BetaParams, Dataset, StatsError};

/// Convergence tolerance on the (ln α, ln β) gradient norm.
pub const TOL_GRAD: f64 = 1e-8;
/// Convergence tolerance on the (ln α, ln β) step norm.
pub const TOL_STEP: f64 = 1e-8;
/// Iteration cap for the Newton loop.
pub const MAX_ITERS: usize = 500;

/// Shape clamp floor for the method-of-moments initializer.
const MOMENT_FLOOR: f64 = 0.01;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("data has {data} values but weight vector has {weights}")]
    LengthMismatch { data: usize, weights: usize },
    #[error("need at least {needed} data points, got {len}")]
    TooFewValues { len: usize, needed: usize },
    #[error("weight at index {index} is {value} (must be finite and >= 0)")]
    InvalidWeight { index: usize, value: f64 },
    #[error("all weights are zero")]
    AllZeroWeights,
    #[error("degenerate data: weighted variance is zero")]
    DegenerateData,
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Per-datum weights for weighted maximum likelihood.
///
/// All weights must be finite and nonnegative with at least one strictly
/// positive. `normalized` records whether the vector has been rescaled to
/// average 1 (up to floating-point rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    normalized: bool,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, FitError> {
        let mut any_positive = false;
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(FitError::InvalidWeight { index, value });
            }
            any_positive |= value > 0.0;
        }
        if !any_positive {
            return Err(FitError::AllZeroWeights);
        }
        Ok(Self {
            weights,
            normalized: false,
        })
    }

    /// Unit weights (already mean-1 by construction).
    pub fn uniform(n: usize) -> Self {
        Self {
            weights: vec![1.0; n],
            normalized: true,
        }
    }

    /// Weights given by a fitted density evaluated at each data point —
    /// the mechanism by which a previous generation's model tilts the
    /// next fit.
    pub fn from_density(params: &BetaParams, data: &Dataset) -> Result<Self, FitError> {
        let mut weights = Vec::with_capacity(data.len());
        for &x in data.values() {
            weights.push(params.pdf(x)?);
        }
        Self::new(weights)
    }

    /// Rescale to mean 1. A no-op when already normalized.
    pub fn normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let mean = self.weights.iter().sum::<f64>() / self.weights.len() as f64;
        Self {
            weights: self.weights.iter().map(|w| w / mean).collect(),
            normalized: true,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

/// Outcome of a (weighted) maximum-likelihood fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub params: BetaParams,
    /// Objective value at the fitted parameters, with the weights as given
    /// by the caller (not the internally normalized copy).
    pub weighted_loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Norm of the (ln α, ln β) gradient of the per-datum objective
    /// (weighted mean log-likelihood) at exit; `converged` implies this
    /// is at most [`TOL_GRAD`].
    pub gradient_norm_at_exit: f64,
}

/// Σ_i w_i · ln f(x_i; α, β), evaluated point by point.
pub fn weighted_log_likelihood(
    params: &BetaParams,
    data: &Dataset,
    w: &WeightVector,
) -> Result<f64, FitError> {
    check_lengths(data, w)?;
    let mut total = 0.0;
    for (&x, &wi) in data.values().iter().zip(w.weights()) {
        total += wi * params.ln_pdf(x)?;
    }
    Ok(total)
}

/// Weighted method-of-moments estimate, used to start the optimizer.
///
/// With weighted mean m and weighted population variance v (divide by Σw),
/// α = m(m(1−m)/v − 1) and β = (1−m)(m(1−m)/v − 1), both clamped to at
/// least 0.01.
pub fn weighted_method_of_moments(
    data: &Dataset,
    w: &WeightVector,
) -> Result<BetaParams, FitError> {
    check_lengths(data, w)?;
    if data.len() < 2 {
        return Err(FitError::TooFewValues {
            len: data.len(),
            needed: 2,
        });
    }
    let w_sum: f64 = w.weights().iter().sum();
    let mean = data
        .values()
        .iter()
        .zip(w.weights())
        .map(|(x, wi)| wi * x)
        .sum::<f64>()
        / w_sum;
    let var = data
        .values()
        .iter()
        .zip(w.weights())
        .map(|(x, wi)| wi * (x - mean) * (x - mean))
        .sum::<f64>()
        / w_sum;
    if !(var > 0.0) || !var.is_finite() {
        return Err(FitError::DegenerateData);
    }
    let scale = mean * (1.0 - mean) / var - 1.0;
    let alpha = (mean * scale).max(MOMENT_FLOOR);
    let beta = ((1.0 - mean) * scale).max(MOMENT_FLOOR);
    Ok(BetaParams::new(alpha, beta).expect("clamped positive shapes"))
}

/// Unweighted maximum-likelihood fit: [`fit_wmle`] with unit weights.
pub fn fit_mle(data: &Dataset) -> Result<FitResult, FitError> {
    fit_wmle(data, &WeightVector::uniform(data.len()))
}

/// Weighted maximum-likelihood fit by damped Newton on (ln α, ln β).
///
/// Deterministic given its inputs. Non-convergence within [`MAX_ITERS`]
/// is reported through `converged = false`, not an error, so callers
/// choose their own policy.
pub fn fit_wmle(data: &Dataset, w: &WeightVector) -> Result<FitResult, FitError> {
    let (result, _) = fit_wmle_traced(data, w)?;
    Ok(result)
}

/// As [`fit_wmle`], also returning the objective value after every
/// accepted iterate (for ascent diagnostics).
pub(crate) fn fit_wmle_traced(
    data: &Dataset,
    w: &WeightVector,
) -> Result<(FitResult, Vec<f64>), FitError> {
    check_lengths(data, w)?;
    if data.len() < 2 {
        return Err(FitError::TooFewValues {
            len: data.len(),
            needed: 2,
        });
    }
    let wn = w.normalized();
    let start = weighted_method_of_moments(data, &wn)?;
    let stats = SuffStats::collect(data, &wn);

    // Newton steps smaller than this are taken without the objective
    // gate: so close to the optimum the true per-step improvement drops
    // below f64 evaluation noise, while the Newton iteration itself still
    // contracts quadratically.
    const POLISH_STEP: f64 = 1e-5;

    let mut a = start.alpha().ln();
    let mut b = start.beta().ln();
    let mut ll = stats.loglik(a, b);
    let mut path = vec![ll];
    let mut iterations = 0;
    let mut converged = false;
    let (mut ga, mut gb) = stats.log_gradient(a, b);
    let mut gnorm = (ga * ga + gb * gb).sqrt();

    if gnorm <= TOL_GRAD {
        converged = true;
    } else {
        for iter in 1..=MAX_ITERS {
            iterations = iter;
            let (da, db) = newton_direction(&stats, a, b, ga, gb);
            let full_norm = (da * da + db * db).sqrt();

            // Backtracking line search on strict ascent.
            let mut accepted = false;
            let mut step = 1.0;
            let mut next = (a, b, ll);
            for _ in 0..40 {
                let a2 = a + step * da;
                let b2 = b + step * db;
                let ll2 = stats.loglik(a2, b2);
                if ll2.is_finite() && ll2 > ll {
                    next = (a2, b2, ll2);
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }

            let step_norm;
            if accepted {
                step_norm = step * full_norm;
                (a, b, ll) = next;
                path.push(ll);
            } else if full_norm <= POLISH_STEP && (a + da).exp().is_finite() {
                // Polish: ungated full Newton step below objective
                // resolution.
                step_norm = full_norm;
                a += da;
                b += db;
            } else {
                // No representable ascent and the step is not small:
                // stuck. The gradient decides the flag.
                converged = gnorm <= TOL_GRAD;
                break;
            }

            (ga, gb) = stats.log_gradient(a, b);
            gnorm = (ga * ga + gb * gb).sqrt();
            if step_norm <= TOL_STEP && gnorm <= TOL_GRAD {
                converged = true;
                break;
            }
        }
    }

    let params = BetaParams::new(a.exp(), b.exp()).expect("finite positive iterate");
    let weighted_loglik = weighted_log_likelihood(&params, data, w)?;
    Ok((
        FitResult {
            params,
            weighted_loglik,
            iterations,
            converged,
            gradient_norm_at_exit: gnorm,
        },
        path,
    ))
}

fn check_lengths(data: &Dataset, w: &WeightVector) -> Result<(), FitError> {
    if data.len() != w.len() {
        return Err(FitError::LengthMismatch {
            data: data.len(),
            weights: w.len(),
        });
    }
    Ok(())
}

/// Weighted-mean sufficient statistics of the likelihood: the objective
/// optimized is L/Σw, which shares the argmax of L and keeps gradient
/// magnitudes per-datum so the tolerances do not scale with n.
struct SuffStats {
    mean_ln_x: f64,
    mean_ln_1mx: f64,
}

impl SuffStats {
    fn collect(data: &Dataset, w: &WeightVector) -> Self {
        let mut w_sum = 0.0;
        let mut s_ln_x = 0.0;
        let mut s_ln_1mx = 0.0;
        for (&x, &wi) in data.values().iter().zip(w.weights()) {
            w_sum += wi;
            s_ln_x += wi * x.ln();
            s_ln_1mx += wi * (1.0 - x).ln();
        }
        Self {
            mean_ln_x: s_ln_x / w_sum,
            mean_ln_1mx: s_ln_1mx / w_sum,
        }
    }

    fn loglik(&self, a: f64, b: f64) -> f64 {
        if !(-300.0..=300.0).contains(&a) || !(-300.0..=300.0).contains(&b) {
            return f64::NEG_INFINITY;
        }
        let alpha = a.exp();
        let beta = b.exp();
        (alpha - 1.0) * self.mean_ln_x + (beta - 1.0) * self.mean_ln_1mx - ln_beta(alpha, beta)
    }

    /// Gradient with respect to (ln α, ln β).
    fn log_gradient(&self, a: f64, b: f64) -> (f64, f64) {
        let alpha = a.exp();
        let beta = b.exp();
        let psi_ab = digamma(alpha + beta);
        let g_alpha = self.mean_ln_x - (digamma(alpha) - psi_ab);
        let g_beta = self.mean_ln_1mx - (digamma(beta) - psi_ab);
        (alpha * g_alpha, beta * g_beta)
    }

    /// Hessian with respect to (ln α, ln β).
    fn log_hessian(&self, a: f64, b: f64, ga: f64, gb: f64) -> (f64, f64, f64) {
        let alpha = a.exp();
        let beta = b.exp();
        let tri_ab = trigamma(alpha + beta);
        let h_aa = -(trigamma(alpha) - tri_ab);
        let h_bb = -(trigamma(beta) - tri_ab);
        let h_ab = tri_ab;
        (
            ga + alpha * alpha * h_aa,
            alpha * beta * h_ab,
            gb + beta * beta * h_bb,
        )
    }
}

/// Newton ascent direction, Levenberg-damped until the (negated) Hessian
/// is positive definite and the solve is finite.
fn newton_direction(stats: &SuffStats, a: f64, b: f64, ga: f64, gb: f64) -> (f64, f64) {
    let (haa, hab, hbb) = stats.log_hessian(a, b, ga, gb);
    let scale = haa.abs().max(hbb.abs()).max(1e-8);
    let mut lambda = 0.0;
    for _ in 0..60 {
        let paa = haa - lambda;
        let pbb = hbb - lambda;
        let det = paa * pbb - hab * hab;
        if paa < 0.0 && det > 0.0 {
            let da = -(pbb * ga - hab * gb) / det;
            let db = -(paa * gb - hab * ga) / det;
            if da.is_finite() && db.is_finite() {
                return (da, db);
            }
        }
        lambda = if lambda == 0.0 {
            1e-8 * scale
        } else {
            lambda * 10.0
        };
    }
    // Fully damped fallback: plain gradient ascent, unit-capped.
    let gnorm = (ga * ga + gb * gb).sqrt().max(1e-300);
    (ga / gnorm, gb / gnorm)
}
