//! Approximation-ratio experiment: longest 2-opt local optimum found by
//! restarts against the Held-Karp optimum, across a σ grid.

use serde::Serialize;
use twopt_core::{Metric, PivotRule};

use crate::config::{Model, OptMode, OriginSource, SweepConfig};
use crate::error::{validation, Result};
use crate::fit::{group_means, linear_fit, Fit, GroupMean};
use crate::sweep::{run_sweep, SweepRow};

#[derive(Debug, Clone, PartialEq)]
pub struct RatioConfig {
    pub n: usize,
    pub sigmas: Vec<f64>,
    pub restarts: usize,
    pub seeds: usize,
    pub base_seed: u64,
    pub origins: OriginSource,
    pub metric: Metric,
    pub pivot: PivotRule,
    /// Share origins, noise and restart seeds across σ for each seed index.
    pub paired: bool,
    pub threads: Option<usize>,
}

impl RatioConfig {
    pub fn sweep_config(&self) -> Result<SweepConfig> {
        if self.restarts == 0 {
            return Err(validation("restarts must be ≥ 1"));
        }
        let cfg = SweepConfig {
            n: vec![self.n],
            model: Model::Gaussian(self.sigmas.clone()),
            metric: vec![self.metric],
            pivot: vec![self.pivot],
            origins: vec![self.origins.clone()],
            seeds: self.seeds,
            base_seed: self.base_seed,
            restarts: self.restarts,
            opt: OptMode::Exact,
            paired: self.paired,
            threads: self.threads,
            ..SweepConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioSummary {
    /// Mean ratio per σ, in increasing σ.
    pub by_sigma: Vec<GroupMean>,
    pub min_ratio: f64,
    /// `mean ratio ≈ intercept + slope·ln(1/σ)`, when at least three σ values are present.
    pub log_fit: Option<Fit>,
}

pub fn summarize(rows: &[SweepRow]) -> Result<RatioSummary> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for r in rows {
        match (r.sigma, r.ratio) {
            (Some(s), Some(q)) => {
                xs.push(s);
                ys.push(q);
            }
            _ => return Err(validation("ratio rows need sigma and ratio columns")),
        }
    }
    let by_sigma = group_means(&xs, &ys);
    let min_ratio = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let positive: Vec<&GroupMean> = by_sigma.iter().filter(|g| g.x > 0.0).collect();
    let log_fit = if positive.len() >= 3 {
        let lx: Vec<f64> = positive.iter().map(|g| (1.0 / g.x).ln()).collect();
        let ly: Vec<f64> = positive.iter().map(|g| g.mean).collect();
        Some(linear_fit(&lx, &ly)?)
    } else {
        None
    };
    Ok(RatioSummary {
        by_sigma,
        min_ratio,
        log_fit,
    })
}

/// Steps where the mean rises as σ grows, as `(index, relative increase)`.
pub fn increases(means: &[GroupMean]) -> Vec<(usize, f64)> {
    means
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].mean > w[0].mean)
        .map(|(k, w)| (k + 1, w[1].mean / w[0].mean - 1.0))
        .collect()
}

/// Non-increasing up to `allowed` steps, each rising by at most `tolerance` (relative).
pub fn is_non_increasing(means: &[GroupMean], allowed: usize, tolerance: f64) -> bool {
    let ups = increases(means);
    ups.len() <= allowed && ups.iter().all(|&(_, r)| r <= tolerance)
}

pub fn run_ratio(cfg: &RatioConfig) -> Result<(Vec<SweepRow>, RatioSummary)> {
    let rows = run_sweep(&cfg.sweep_config()?)?;
    let summary = summarize(&rows)?;
    Ok((rows, summary))
}
