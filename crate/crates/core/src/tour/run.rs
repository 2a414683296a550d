use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::initial_tour_with;
use super::search::{all_improving, best_improving, max_violation, FirstScanner};
use super::{CostTable, InitRule, PivotRule, Tour, TwoChange};
use crate::error::{Error, Result};
use crate::geometry::Metric;
use crate::stochastic::rng::{stream_rng, streams};
use crate::stochastic::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub metric: Metric,
    pub init: InitRule,
    pub pivot: PivotRule,
    pub eps: f64,
    pub seed: u64,
    pub max_iter: u64,
    pub record_changes: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metric: Metric::Euclidean,
            init: InitRule::Random,
            pivot: PivotRule::First,
            eps: crate::DEFAULT_EPS,
            seed: 0,
            max_iter: u64::MAX,
            record_changes: false,
        }
    }
}

/// Trace of one 2-opt run: a sampled path in the 2-opt state graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub metric: Metric,
    pub pivot: PivotRule,
    pub init: InitRule,
    pub eps: f64,
    pub n: usize,
    pub initial_length: f64,
    pub final_length: f64,
    pub iterations: u64,
    /// False when `max_iter` stopped the run before a local optimum.
    pub converged: bool,
    /// Result of the closing all-pairs scan.
    pub certified: bool,
    pub min_gain_observed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub changes: Option<Vec<TwoChange>>,
    pub final_order: Vec<usize>,
}

impl RunRecord {
    pub fn final_tour(&self, inst: &Instance) -> Result<Tour> {
        Tour::new(self.final_order.clone(), inst, self.metric)
    }
}

/// Runs 2-opt from the configured initial tour until no 2-change gains more
/// than `eps`, or `max_iter` changes have been applied.
pub fn run_two_opt(inst: &Instance, cfg: &RunConfig) -> Result<RunRecord> {
    let costs = CostTable::new(inst, cfg.metric);
    run_two_opt_with(&costs, cfg)
}

pub(crate) fn run_two_opt_with(costs: &CostTable, cfg: &RunConfig) -> Result<RunRecord> {
    if costs.len() < 3 {
        return Err(Error::InvalidTour(format!("tours need n ≥ 3, got {}", costs.len())));
    }
    let tour = initial_tour_with(costs, cfg.metric, cfg.init, cfg.seed)?;
    Ok(improve(tour, costs, cfg))
}

pub(crate) fn improve(mut tour: Tour, costs: &CostTable, cfg: &RunConfig) -> RunRecord {
    let initial_length = tour.length();
    let mut changes = cfg.record_changes.then(Vec::new);
    let mut iterations = 0u64;
    let mut min_gain: Option<f64> = None;
    let mut scanner = FirstScanner::default();
    let mut pivot_rng = stream_rng(cfg.seed, streams::PIVOT);
    let mut converged = true;

    loop {
        let next = match cfg.pivot {
            PivotRule::First => scanner.next(tour.order(), costs, cfg.eps),
            PivotRule::Best => best_improving(tour.order(), costs, cfg.eps),
            PivotRule::Random => {
                let all = all_improving(tour.order(), costs, cfg.eps);
                if all.is_empty() {
                    None
                } else {
                    Some(all[pivot_rng.random_range(0..all.len())])
                }
            }
        };
        let Some((i, j, gain)) = next else { break };
        if iterations >= cfg.max_iter {
            converged = false;
            break;
        }
        if let Some(list) = changes.as_mut() {
            list.push(tour.change_at(i, j, gain));
        }
        tour.apply_positions(i, j, gain);
        iterations += 1;
        min_gain = Some(min_gain.map_or(gain, |m: f64| m.min(gain)));
    }

    let certified = max_violation(tour.order(), costs, cfg.eps).is_none();
    RunRecord {
        seed: cfg.seed,
        metric: cfg.metric,
        pivot: cfg.pivot,
        init: cfg.init,
        eps: cfg.eps,
        n: costs.len(),
        initial_length,
        final_length: tour.length(),
        iterations,
        converged,
        certified,
        min_gain_observed: min_gain,
        changes,
        final_order: tour.into_order(),
    }
}
