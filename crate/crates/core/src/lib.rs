//! driftlab — a desk-scale simulator and analysis toolkit for two
//! phenomena that arise when models are trained on their own synthetic
//! output: bias amplification and model collapse.
//!
//! The crate has three legs:
//!
//! 1. **Generational estimation loops** ([`stats`], [`estimation`],
//!    [`sim`]) — iterated (weighted) maximum-likelihood fits of Beta
//!    distributions, where the previous generation's fitted density
//!    weights the next fit. Weighted fits drift toward the pretraining
//!    bias; unweighted fits with large samples stay put; unweighted fits
//!    with small samples random-walk (collapse), which mitigation
//!    policies damp.
//! 2. **A gradient-descent projection toy model** ([`projection`]) —
//!    parameters decomposed against a fixed bias direction, with the
//!    projection coefficient of the gradient deciding whether a step
//!    amplifies the biased component.
//! 3. **Trajectory analysis** ([`regression`], [`trajectory`],
//!    [`metrics`]) — first-difference regressions of per-signal series
//!    against outcome series with Newey–West standard errors,
//!    significance sets at a threshold, and overlap statistics between
//!    sets.
//!
//! The `driftlab` binary exposes the same capabilities as subcommands;
//! see the `examples/` directory for library-level entry points.

pub mod estimation;
pub mod metrics;
pub mod projection;
pub mod regression;
pub mod runner;
pub mod sim;
pub mod trajectory;
pub(crate) mod special;
pub mod stats;
