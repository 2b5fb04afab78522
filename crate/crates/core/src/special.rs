//! Log-gamma, digamma, and trigamma.
//!
//! All three use the same scheme: upward recurrence to x ≥ 14, then the
//! Bernoulli asymptotic series. The series for ψ and ψ₁ are the exact
//! term-by-term derivatives of the ln Γ series, so the likelihood
//! objective and its analytic gradient/Hessian built from these agree to
//! machine rounding — the optimizer's line search depends on that.

use std::f64::consts::PI;

/// ln Γ(x) for x > 0, accurate to ~1e-15 relative.
pub(crate) fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    let mut x = x;
    while x < 14.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Stirling: (x−½)ln x − x + ½ln 2π + Σ B_2k / (2k(2k−1) x^(2k−1))
    let tail = 1.0 / 12.0
        - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + inv * tail
}

/// ln B(α, β) = ln Γ(α) + ln Γ(β) − ln Γ(α+β).
pub(crate) fn ln_beta(alpha: f64, beta: f64) -> f64 {
    ln_gamma(alpha) + ln_gamma(beta) - ln_gamma(alpha + beta)
}

/// Digamma ψ(x) for x > 0.
pub(crate) fn digamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut x = x;
    while x < 14.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // ln x − 1/(2x) − Σ B_2k / (2k x^2k)
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = 1.0 / 12.0
        - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0)));
    acc + x.ln() - 0.5 * inv - inv2 * tail
}

/// Trigamma ψ₁(x) for x > 0.
pub(crate) fn trigamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut acc = 0.0;
    let mut x = x;
    while x < 14.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // 1/x + 1/(2x²) + Σ B_2k / x^(2k+1)
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let tail = 1.0 / 6.0
        - inv2
            * (1.0 / 30.0
                - inv2
                    * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * (5.0 / 66.0 - inv2 * 691.0 / 2730.0))));
    acc + inv * (1.0 + inv * (0.5 + inv * tail))
}
