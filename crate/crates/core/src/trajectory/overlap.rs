//! Overlap statistics between two significant sets.

use serde::Serialize;
use std::collections::BTreeSet;

use super::TrajectoryError;
use crate::special::ln_gamma;

/// Intersection, Jaccard index, and hypergeometric enrichment of two
/// signal sets drawn from the same universe.
#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub size_a: usize,
    pub size_b: usize,
    pub intersection_size: usize,
    pub union_size: usize,
    pub intersection: BTreeSet<String>,
    /// |A ∩ B| / |A ∪ B|, defined as 0 when both sets are empty.
    pub jaccard: f64,
    /// P[X ≥ |A ∩ B|] for X hypergeometric: the chance two independent
    /// uniformly-random sets of these sizes overlap at least this much.
    pub hypergeometric_p: f64,
    pub universe: usize,
}

/// Compare two significant sets against a universe of `universe` signals.
pub fn overlap_report(
    set_a: &BTreeSet<String>,
    set_b: &BTreeSet<String>,
    universe: usize,
) -> Result<OverlapReport, TrajectoryError> {
    for set in [set_a, set_b] {
        if set.len() > universe {
            return Err(TrajectoryError::SetExceedsUniverse {
                size: set.len(),
                universe,
            });
        }
    }
    let intersection: BTreeSet<String> = set_a.intersection(set_b).cloned().collect();
    let union_size = set_a.len() + set_b.len() - intersection.len();
    let jaccard = if union_size == 0 {
        0.0
    } else {
        intersection.len() as f64 / union_size as f64
    };
    let hypergeometric_p =
        hypergeometric_tail_ge(universe, set_a.len(), set_b.len(), intersection.len());
    Ok(OverlapReport {
        size_a: set_a.len(),
        size_b: set_b.len(),
        intersection_size: intersection.len(),
        union_size,
        intersection,
        jaccard,
        hypergeometric_p,
        universe,
    })
}

/// P[X ≥ k] for X ~ Hypergeometric(N, K, n): draw n items from a
/// universe of N containing K marked ones. Summed in probability space
/// from log-space binomial coefficients.
pub fn hypergeometric_tail_ge(n_universe: usize, k_marked: usize, n_draws: usize, k: usize) -> f64 {
    let upper = k_marked.min(n_draws);
    if k == 0 {
        return 1.0;
    }
    if k > upper {
        return 0.0;
    }
    let ln_choose = |n: usize, r: usize| -> f64 {
        ln_gamma((n + 1) as f64) - ln_gamma((r + 1) as f64) - ln_gamma((n - r + 1) as f64)
    };
    let denom = ln_choose(n_universe, n_draws);
    let mut p = 0.0;
    for j in k..=upper {
        if n_draws - j > n_universe - k_marked {
            continue; // not enough unmarked items for this term
        }
        p += (ln_choose(k_marked, j) + ln_choose(n_universe - k_marked, n_draws - j) - denom)
            .exp();
    }
    p.min(1.0)
}
