//! First-difference OLS with Newey–West (HAC) standard errors.
//!
//! The pipeline run per signal is
//!
//! ```text
//! Δy_i = α + β Δx_i + ε_i
//! ```
//!
//! estimated by least squares on the differenced series, with the slope's
//! standard error from the Bartlett-kernel HAC sandwich
//!
//! ```text
//! S   = Σ_t e_t² x̃_t x̃_tᵀ
//!     + Σ_{l=1..L} (1 − l/(L+1)) Σ_{t>l} e_t e_{t−l} (x̃_t x̃_{t−l}ᵀ + x̃_{t−l} x̃_tᵀ)
//! Var = (XᵀX)⁻¹ S (XᵀX)⁻¹
//! ```
//!
//! where x̃_t = (1, Δx_t). Two-sided p-values use Student's t with T−2
//! degrees of freedom. At lag 0 the kernel sum is empty and the estimator
//! reduces to White's heteroskedasticity-only standard error.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RegressionError {
    #[error("series `{label}` has {got} points, need at least {needed}")]
    TooShort {
        label: String,
        needed: usize,
        got: usize,
    },
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("lag {lag} must be smaller than the {t} differenced observations")]
    LagTooLarge { lag: usize, t: usize },
    #[error("regressor has zero variance")]
    DegenerateRegressor,
    #[error("residual vector length {residuals} does not match {t} observations")]
    ResidualMismatch { residuals: usize, t: usize },
}

/// An ordered series of values indexed by model version.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// First-order differences: element k is `s[k+1] − s[k]`.
pub fn first_difference(s: &Series) -> Result<Series, RegressionError> {
    if s.len() < 2 {
        return Err(RegressionError::TooShort {
            label: s.label.clone(),
            needed: 2,
            got: s.len(),
        });
    }
    Ok(Series::new(
        format!("diff({})", s.label),
        s.values.windows(2).map(|w| w[1] - w[0]).collect(),
    ))
}

/// Intercept, slope, and residuals of a simple least-squares fit.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    pub residuals: Vec<f64>,
}

/// Simple OLS of `dy` on `dx` with intercept.
pub fn ols_fit(dx: &Series, dy: &Series) -> Result<OlsFit, RegressionError> {
    if dx.len() != dy.len() {
        return Err(RegressionError::LengthMismatch {
            x: dx.len(),
            y: dy.len(),
        });
    }
    let t = dx.len();
    if t < 3 {
        return Err(RegressionError::TooShort {
            label: dx.label.clone(),
            needed: 3,
            got: t,
        });
    }
    let n = t as f64;
    let mean_x = dx.values.iter().sum::<f64>() / n;
    let mean_y = dy.values.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in dx.values.iter().zip(&dy.values) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(RegressionError::DegenerateRegressor);
    }
    let beta_hat = sxy / sxx;
    let alpha_hat = mean_y - beta_hat * mean_x;
    let residuals = dx
        .values
        .iter()
        .zip(&dy.values)
        .map(|(x, y)| y - alpha_hat - beta_hat * x)
        .collect();
    Ok(OlsFit {
        alpha_hat,
        beta_hat,
        residuals,
    })
}

/// Newey–West standard error of the slope.
pub fn newey_west_se(
    dx: &Series,
    residuals: &[f64],
    lag: usize,
) -> Result<f64, RegressionError> {
    let t = dx.len();
    if residuals.len() != t {
        return Err(RegressionError::ResidualMismatch {
            residuals: residuals.len(),
            t,
        });
    }
    if lag >= t {
        return Err(RegressionError::LagTooLarge { lag, t });
    }

    let x = &dx.values;
    let n = t as f64;
    let sum_x: f64 = x.iter().sum();
    let sum_xx: f64 = x.iter().map(|v| v * v).sum();
    let det = n * sum_xx - sum_x * sum_x;
    if det <= 0.0 || !det.is_finite() {
        return Err(RegressionError::DegenerateRegressor);
    }

    // S accumulated as its three distinct entries (symmetric 2×2).
    let mut s00 = 0.0;
    let mut s01 = 0.0;
    let mut s11 = 0.0;
    for (&xt, &et) in x.iter().zip(residuals) {
        let e2 = et * et;
        s00 += e2;
        s01 += e2 * xt;
        s11 += e2 * xt * xt;
    }
    for l in 1..=lag {
        let w = 1.0 - l as f64 / (lag as f64 + 1.0);
        let mut c00 = 0.0;
        let mut c01 = 0.0;
        let mut c11 = 0.0;
        for t_i in l..t {
            let ee = residuals[t_i] * residuals[t_i - l];
            c00 += ee;
            c01 += ee * (x[t_i] + x[t_i - l]);
            c11 += ee * x[t_i] * x[t_i - l];
        }
        s00 += 2.0 * w * c00;
        s01 += w * c01;
        s11 += 2.0 * w * c11;
    }

    // Var = (XᵀX)⁻¹ S (XᵀX)⁻¹; slope entry only. The slope row of
    // (XᵀX)⁻¹ is (−sum_x, n) / det.
    let var_slope = (sum_x * sum_x * s00 - 2.0 * n * sum_x * s01 + n * n * s11) / (det * det);
    Ok(var_slope.max(0.0).sqrt())
}

/// Newey–West rule-of-thumb lag: floor(4 (T/100)^(2/9)).
pub fn auto_lag(t: usize) -> usize {
    (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Output of the differenced regression for one signal.
#[derive(Debug, Clone, Serialize)]
pub struct DiffRegressionResult {
    pub alpha_hat: f64,
    pub beta_hat: f64,
    /// Newey–West standard error of the slope.
    pub se_nw: f64,
    pub t_stat: f64,
    /// Two-sided p-value from Student's t with `n_obs − 2` degrees of
    /// freedom; 1.0 for untestable signals.
    pub p_value: f64,
    /// Number of differenced observations actually regressed.
    pub n_obs: usize,
    pub lag_used: usize,
    /// False when the regressor was degenerate (constant signal); such
    /// results carry NaN estimates and p = 1 so bulk runs stay total.
    pub testable: bool,
}

impl DiffRegressionResult {
    fn untestable(n_obs: usize, lag_used: usize) -> Self {
        Self {
            alpha_hat: f64::NAN,
            beta_hat: f64::NAN,
            se_nw: f64::NAN,
            t_stat: f64::NAN,
            p_value: 1.0,
            n_obs,
            lag_used,
            testable: false,
        }
    }
}

/// Difference both series, regress, and test the slope.
///
/// `lag = None` selects the rule-of-thumb lag from the differenced
/// length. Degenerate regressors yield an untestable result rather than
/// an error.
pub fn fit_diff_regression(
    x: &Series,
    y: &Series,
    lag: Option<usize>,
) -> Result<DiffRegressionResult, RegressionError> {
    if x.len() != y.len() {
        return Err(RegressionError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 4 {
        return Err(RegressionError::TooShort {
            label: x.label.clone(),
            needed: 4,
            got: x.len(),
        });
    }
    let dx = first_difference(x)?;
    let dy = first_difference(y)?;
    regress_differenced(&dx, &dy, lag)
}

/// The post-differencing stage, shared with the bulk analyzer (which
/// applies round-boundary masks to the differenced series first).
pub(crate) fn regress_differenced(
    dx: &Series,
    dy: &Series,
    lag: Option<usize>,
) -> Result<DiffRegressionResult, RegressionError> {
    let t = dx.len();
    let lag_used = lag.unwrap_or_else(|| auto_lag(t));
    if lag_used >= t {
        return Err(RegressionError::LagTooLarge { lag: lag_used, t });
    }
    let ols = match ols_fit(dx, dy) {
        Ok(fit) => fit,
        Err(RegressionError::DegenerateRegressor) => {
            return Ok(DiffRegressionResult::untestable(t, lag_used))
        }
        Err(e) => return Err(e),
    };
    let se_nw = newey_west_se(dx, &ols.residuals, lag_used)?;
    let df = (t - 2) as f64;
    let (t_stat, p_value) = if se_nw > 0.0 {
        let t_stat = ols.beta_hat / se_nw;
        (t_stat, two_sided_p(t_stat, df))
    } else if ols.beta_hat == 0.0 {
        // A perfect fit with zero slope carries no evidence against the
        // null.
        (0.0, 1.0)
    } else {
        (f64::INFINITY * ols.beta_hat.signum(), 0.0)
    };
    Ok(DiffRegressionResult {
        alpha_hat: ols.alpha_hat,
        beta_hat: ols.beta_hat,
        se_nw,
        t_stat,
        p_value,
        n_obs: t,
        lag_used,
        testable: true,
    })
}

fn two_sided_p(t_stat: f64, df: f64) -> f64 {
    if t_stat.is_infinite() {
        return 0.0;
    }
    let dist = StudentsT::new(0.0, 1.0, df).expect("df >= 1");
    2.0 * (1.0 - dist.cdf(t_stat.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::SeedSpec;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn series(values: &[f64]) -> Series {
        Series::new("s", values.to_vec())
    }

    #[test]
    fn difference_examples() {
        let d = first_difference(&series(&[1.0, 2.0, 4.0, 7.0])).unwrap();
        assert_eq!(d.values, vec![1.0, 2.0, 3.0]);

        let c = first_difference(&series(&[0.4; 5])).unwrap();
        assert!(c.values.iter().all(|&v| v == 0.0));

        // Right-leaning shares rising 53.7% → 60% → 67.6%.
        let p = first_difference(&series(&[0.537, 0.60, 0.676])).unwrap();
        assert_relative_eq!(p.values[0], 0.063, max_relative = 1e-12);
        assert_relative_eq!(p.values[1], 0.076, max_relative = 1e-12);

        assert!(matches!(
            first_difference(&series(&[1.0])),
            Err(RegressionError::TooShort { .. })
        ));
    }

    #[test]
    fn ols_recovers_exact_line() {
        let dx = series(&[0.0, 1.0, 2.0, 3.0]);
        let dy = series(&[1.0, 3.0, 5.0, 7.0]);
        let fit = ols_fit(&dx, &dy).unwrap();
        assert_relative_eq!(fit.alpha_hat, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fit.beta_hat, 2.0, max_relative = 1e-12);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn ols_orthogonal_gives_zero_slope() {
        // Demeaned x and y with Σ x y = 0.
        let dx = series(&[-1.0, 0.0, 1.0]);
        let dy = series(&[1.0, -2.0, 1.0]);
        let fit = ols_fit(&dx, &dy).unwrap();
        assert!(fit.beta_hat.abs() < 1e-14);
    }

    #[test]
    fn ols_matches_normal_equations_oracle() {
        let dx = series(&[0.3, -1.2, 2.5, 0.9, -0.4]);
        let dy = series(&[1.1, 0.2, 3.7, 1.9, 0.6]);
        let fit = ols_fit(&dx, &dy).unwrap();
        // Brute-force normal equations: solve [n Σx; Σx Σx²][a b]ᵀ = [Σy Σxy]ᵀ.
        let n = 5.0;
        let sx: f64 = dx.values.iter().sum();
        let sxx: f64 = dx.values.iter().map(|v| v * v).sum();
        let sy: f64 = dy.values.iter().sum();
        let sxy: f64 = dx.values.iter().zip(&dy.values).map(|(a, b)| a * b).sum();
        let det = n * sxx - sx * sx;
        let alpha = (sxx * sy - sx * sxy) / det;
        let beta = (n * sxy - sx * sy) / det;
        assert_relative_eq!(fit.alpha_hat, alpha, max_relative = 1e-12);
        assert_relative_eq!(fit.beta_hat, beta, max_relative = 1e-12);
    }

    #[test]
    fn ols_rejects_constant_regressor() {
        let dx = series(&[1.0, 1.0, 1.0]);
        let dy = series(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            ols_fit(&dx, &dy),
            Err(RegressionError::DegenerateRegressor)
        ));
    }

    /// Literal matrix-form implementation of the HAC sandwich, kept as an
    /// independent oracle: builds full 2-vectors per observation and runs
    /// the double sum with explicit 2×2 products.
    fn nw_oracle(dx: &[f64], e: &[f64], lag: usize) -> f64 {
        let t_len = dx.len();
        let rows: Vec<[f64; 2]> = dx.iter().map(|&v| [1.0, v]).collect();
        let mut xtx = [[0.0f64; 2]; 2];
        for r in &rows {
            for i in 0..2 {
                for j in 0..2 {
                    xtx[i][j] += r[i] * r[j];
                }
            }
        }
        let mut s = [[0.0f64; 2]; 2];
        for t in 0..t_len {
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] += e[t] * e[t] * rows[t][i] * rows[t][j];
                }
            }
        }
        for l in 1..=lag {
            let w = 1.0 - l as f64 / (lag as f64 + 1.0);
            for t in l..t_len {
                for i in 0..2 {
                    for j in 0..2 {
                        s[i][j] +=
                            w * e[t] * e[t - l] * (rows[t][i] * rows[t - l][j] + rows[t - l][i] * rows[t][j]);
                    }
                }
            }
        }
        let det = xtx[0][0] * xtx[1][1] - xtx[0][1] * xtx[1][0];
        let inv = [
            [xtx[1][1] / det, -xtx[0][1] / det],
            [-xtx[1][0] / det, xtx[0][0] / det],
        ];
        // var = inv * s * inv
        let mut tmp = [[0.0f64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    tmp[i][j] += inv[i][k] * s[k][j];
                }
            }
        }
        let mut var = [[0.0f64; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    var[i][j] += tmp[i][k] * inv[k][j];
                }
            }
        }
        var[1][1].max(0.0).sqrt()
    }

    #[test]
    fn nw_hand_case_matches_oracle() {
        let dx = [0.3, -1.2, 2.5, 0.9, -0.4];
        let dy = [1.1, 0.2, 3.7, 1.4, 0.9];
        let sx = series(&dx);
        let fit = ols_fit(&sx, &series(&dy)).unwrap();
        let se = newey_west_se(&sx, &fit.residuals, 1).unwrap();
        let oracle = nw_oracle(&dx, &fit.residuals, 1);
        assert_relative_eq!(se, oracle, max_relative = 1e-10);
    }

    #[test]
    fn nw_lag0_equals_white() {
        let dx = [0.3, -1.2, 2.5, 0.9, -0.4, 1.7];
        let dy = [1.1, 0.2, 3.7, 1.4, 0.9, -0.3];
        let sx = series(&dx);
        let fit = ols_fit(&sx, &series(&dy)).unwrap();
        let se = newey_west_se(&sx, &fit.residuals, 0).unwrap();
        let white = nw_oracle(&dx, &fit.residuals, 0);
        assert_relative_eq!(se, white, max_relative = 1e-13);
    }

    #[test]
    fn nw_random_cases_match_oracle() {
        // Acceptance-grade sweep: every T ≤ 10, lag ≤ 3 combination on
        // random data agrees with the brute-force double sum to 1e-10.
        let mut rng = SeedSpec::new(99, "nw-oracle").rng();
        let mut cases = 0;
        while cases < 1000 {
            let t = 4 + (rng.gen::<u64>() % 7) as usize; // 4..=10
            let lag = (rng.gen::<u64>() % 4) as usize;
            if lag >= t {
                continue;
            }
            let dx: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let dy: Vec<f64> = (0..t).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let sx = series(&dx);
            let fit = match ols_fit(&sx, &series(&dy)) {
                Ok(f) => f,
                Err(_) => continue,
            };
            let se = newey_west_se(&sx, &fit.residuals, lag).unwrap();
            let oracle = nw_oracle(&dx, &fit.residuals, lag);
            assert!(
                (se - oracle).abs() <= 1e-10 * oracle.max(1.0),
                "T={t} lag={lag}: {se} vs {oracle}"
            );
            cases += 1;
        }
    }

    #[test]
    fn nw_rejects_oversized_lag() {
        let dx = series(&[0.1, 0.2, 0.4]);
        assert!(matches!(
            newey_west_se(&dx, &[0.0, 0.0, 0.0], 3),
            Err(RegressionError::LagTooLarge { .. })
        ));
    }

    #[test]
    fn auto_lag_examples() {
        // Differenced length of the 66-version panel.
        assert_eq!(auto_lag(65), 3);
        assert_eq!(auto_lag(100), 4);
    }

    #[test]
    fn perfect_line_is_overwhelmingly_significant() {
        let x = series(&[1.0, 2.0, 4.0, 5.0, 8.0, 9.0, 11.0, 14.0]);
        let y = Series::new("y", x.values.iter().map(|v| 3.0 * v - 1.0).collect());
        let r = fit_diff_regression(&x, &y, None).unwrap();
        assert!(r.testable);
        assert_relative_eq!(r.beta_hat, 3.0, max_relative = 1e-10);
        assert!(r.se_nw < 1e-12);
        assert!(r.p_value < 1e-8);
    }

    #[test]
    fn exactly_zero_residuals_report_infinite_t() {
        // Dyadic values make the fit exact in f64: residuals are
        // bitwise zero, so the SE is zero and t goes to signed infinity.
        let dx = series(&[1.0, 2.0, 4.0, 8.0]);
        let dy = Series::new("y", vec![2.0, 4.0, 8.0, 16.0]);
        let r = regress_differenced(&dx, &dy, Some(0)).unwrap();
        assert_eq!(r.se_nw, 0.0);
        assert!(r.t_stat.is_infinite() && r.t_stat > 0.0);
        assert_eq!(r.p_value, 0.0);

        // Constant zero outcome: perfect fit with zero slope carries no
        // evidence, so p = 1.
        let flat = Series::new("y", vec![0.0; 4]);
        let r = regress_differenced(&dx, &flat, Some(0)).unwrap();
        assert_eq!(r.se_nw, 0.0);
        assert_eq!(r.t_stat, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_signal_is_untestable() {
        let x = series(&[2.0; 8]);
        let y = series(&[0.4, 0.5, 0.3, 0.7, 0.6, 0.2, 0.5, 0.4]);
        let r = fit_diff_regression(&x, &y, None).unwrap();
        assert!(!r.testable);
        assert_eq!(r.p_value, 1.0);
        assert!(r.beta_hat.is_nan());
    }

    #[test]
    fn auto_lag_used_for_66_versions() {
        let mut rng = SeedSpec::new(5, "lag66").rng();
        let x = Series::new("x", (0..66).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
        let y = Series::new("y", (0..66).map(|_| rng.sample::<f64, _>(StandardNormal)).collect());
        let r = fit_diff_regression(&x, &y, None).unwrap();
        assert_eq!(r.n_obs, 65);
        assert_eq!(r.lag_used, 3);
    }

    #[test]
    fn null_rejection_rate_is_calibrated() {
        // Independent random-walk trajectories: differencing whitens
        // them (that is what differencing is for), and the rejection
        // rate at 0.05 stays in [0.02, 0.08] over 10,000 replications.
        let mut rng = SeedSpec::new(314, "null-calibration").rng();
        let reps = 10_000;
        let mut rejections = 0;
        let mut walk = |rng: &mut rand_chacha::ChaCha12Rng| -> Vec<f64> {
            let mut acc = 0.0;
            (0..66)
                .map(|_| {
                    acc += rng.sample::<f64, _>(StandardNormal);
                    acc
                })
                .collect()
        };
        for _ in 0..reps {
            let x = Series::new("x", walk(&mut rng));
            let y = Series::new("y", walk(&mut rng));
            let r = fit_diff_regression(&x, &y, None).unwrap();
            if r.p_value < 0.05 {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!(
            (0.02..=0.08).contains(&rate),
            "null rejection rate = {rate}"
        );
    }

    #[test]
    fn p_value_monotone_in_t() {
        let df = 63.0;
        let ps: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
            .iter()
            .map(|&t| two_sided_p(t, df))
            .collect();
        for w in ps.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert_relative_eq!(ps[0], 1.0, max_relative = 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Scaling x by c scales the slope by 1/c and fixes t and p.
        #[test]
        fn scale_equivariance(c in prop::sample::select(vec![-100.0, -2.5, -0.3, 0.04, 0.7, 12.0]), seed in 0u64..500) {
            let mut rng = SeedSpec::new(seed, "scale-eq").rng();
            let x: Vec<f64> = (0..20).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = (0..20).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let base = fit_diff_regression(&Series::new("x", x.clone()), &Series::new("y", y.clone()), Some(2)).unwrap();
            let scaled_x: Vec<f64> = x.iter().map(|v| c * v).collect();
            let scaled = fit_diff_regression(&Series::new("x", scaled_x), &Series::new("y", y), Some(2)).unwrap();
            prop_assert!((scaled.beta_hat - base.beta_hat / c).abs() <= 1e-10 * base.beta_hat.abs().max(1.0));
            // t flips sign with the regressor for negative c; |t| and p
            // are the invariants.
            let expected_t = base.t_stat * c.signum();
            prop_assert!((scaled.t_stat - expected_t).abs() <= 1e-10 * base.t_stat.abs().max(1.0));
            prop_assert!((scaled.p_value - base.p_value).abs() <= 1e-10);
        }

        /// Adding level shifts to raw series changes nothing material:
        /// differencing annihilates them (up to float rounding in the
        /// shifted differences).
        #[test]
        fn shift_invariance(cx in -50.0f64..50.0, cy in -50.0f64..50.0, seed in 0u64..500) {
            let mut rng = SeedSpec::new(seed, "shift-inv").rng();
            let x: Vec<f64> = (0..20).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let y: Vec<f64> = (0..20).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let base = fit_diff_regression(&Series::new("x", x.clone()), &Series::new("y", y.clone()), Some(1)).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v + cx).collect();
            let ys: Vec<f64> = y.iter().map(|v| v + cy).collect();
            let shifted = fit_diff_regression(&Series::new("x", xs), &Series::new("y", ys), Some(1)).unwrap();
            prop_assert!((shifted.beta_hat - base.beta_hat).abs() <= 1e-8 * base.beta_hat.abs().max(1.0));
            prop_assert!((shifted.t_stat - base.t_stat).abs() <= 1e-8 * base.t_stat.abs().max(1.0));
            prop_assert!((shifted.p_value - base.p_value).abs() <= 1e-8);
        }
    }
}
