//! Instrumented 2-opt for the Euclidean-type TSP under Gaussian-perturbed and
//! density-bounded inputs.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: points, the three distance measures and 2-change gain arithmetic.
//! * [`stochastic`]: seeded instance generation, chi-distribution closed forms and
//!   Monte Carlo probes of the Gaussian tail/ball/line bounds.
//! * [`tour`]: tours, initial-tour rules, the 2-opt runner and Δ_min measurement.
//! * [`linked`]: classification and disjoint counting of linked 2-change pairs.
//! * [`exact`]: Held-Karp, brute force, MST and 2-opt maximum estimation.
//! * [`lower_bound`]: the layered instance whose long tour stays 2-optimal under
//!   small perturbations, with a direct all-pairs certifier.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exact;
pub mod geometry;
pub mod linked;
pub mod lower_bound;
pub mod stochastic;
pub mod tour;

pub use error::{Error, Result};
pub use geometry::{Metric, Point};
pub use stochastic::Instance;
pub use tour::{InitRule, PivotRule, RunRecord, Tour, TwoChange};

/// Default strict-improvement threshold for 2-changes.
pub const DEFAULT_EPS: f64 = 1e-12;
