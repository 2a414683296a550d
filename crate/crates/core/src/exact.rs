//! Exact optima, spanning-tree bounds and the multi-restart 2-opt estimator.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Metric;
use crate::stochastic::{derive_seed, Instance};
use crate::tour::{run_two_opt_with, CostTable, InitRule, PivotRule, RunConfig, Tour};

pub const BRUTE_FORCE_LIMIT: usize = 11;
pub const HELD_KARP_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactAlgorithm {
    HeldKarp,
    BruteForce,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub optimal_length: f64,
    pub optimal_tour: Tour,
    pub algorithm: ExactAlgorithm,
    pub elapsed: Duration,
}

fn check_size(inst: &Instance, algorithm: &'static str, limit: usize) -> Result<()> {
    let n = inst.n();
    if n > limit {
        return Err(Error::Budget { algorithm, n, limit });
    }
    if n < 3 {
        return Err(Error::InvalidTour(format!("tours need n ≥ 3, got {n}")));
    }
    Ok(())
}

fn finish(
    order: Vec<usize>,
    costs: &CostTable,
    metric: Metric,
    algorithm: ExactAlgorithm,
    start: Instant,
) -> ExactResult {
    let optimal_tour = Tour::with_costs(order, costs, metric);
    ExactResult {
        optimal_length: optimal_tour.length(),
        optimal_tour,
        algorithm,
        elapsed: start.elapsed(),
    }
}

/// Exhaustive search over all cycles through vertex 0 (n ≤ 11), with
/// partial-length pruning.
pub fn brute_force(inst: &Instance, metric: Metric) -> Result<ExactResult> {
    check_size(inst, "brute_force", BRUTE_FORCE_LIMIT)?;
    let start = Instant::now();
    let costs = CostTable::dense(inst, metric);
    let n = inst.n();

    struct Search<'a> {
        costs: &'a CostTable,
        path: Vec<usize>,
        used: Vec<bool>,
        best: f64,
        best_path: Vec<usize>,
    }

    impl Search<'_> {
        fn go(&mut self, partial: f64) {
            let n = self.used.len();
            if partial >= self.best {
                return;
            }
            let last = *self.path.last().expect("path starts at 0");
            if self.path.len() == n {
                let total = partial + self.costs.get(last, 0);
                if total < self.best {
                    self.best = total;
                    self.best_path.clone_from(&self.path);
                }
                return;
            }
            for v in 1..n {
                if !self.used[v] {
                    self.used[v] = true;
                    self.path.push(v);
                    self.go(partial + self.costs.get(last, v));
                    self.path.pop();
                    self.used[v] = false;
                }
            }
        }
    }

    let mut used = vec![false; n];
    used[0] = true;
    let mut s = Search {
        costs: &costs,
        path: vec![0],
        used,
        best: f64::INFINITY,
        best_path: Vec::new(),
    };
    s.go(0.0);
    Ok(finish(s.best_path, &costs, metric, ExactAlgorithm::BruteForce, start))
}

/// Subset dynamic program over paths from vertex 0 (n ≤ 20).
pub fn held_karp(inst: &Instance, metric: Metric) -> Result<ExactResult> {
    check_size(inst, "held_karp", HELD_KARP_LIMIT)?;
    let start = Instant::now();
    let costs = CostTable::dense(inst, metric);
    let n = inst.n();
    // Vertex v ≥ 1 is bit v−1; dp[mask·m + j] ends at vertex j+1.
    let m = n - 1;
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full * m];
    let mut parent = vec![u8::MAX; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = costs.get(0, j + 1);
    }
    for mask in 1..full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let cur = dp[mask * m + j];
            if !cur.is_finite() {
                continue;
            }
            for k in 0..m {
                if mask & (1 << k) != 0 {
                    continue;
                }
                let next = mask | (1 << k);
                let cand = cur + costs.get(j + 1, k + 1);
                if cand < dp[next * m + k] {
                    dp[next * m + k] = cand;
                    parent[next * m + k] = j as u8;
                }
            }
        }
    }
    let last_mask = full - 1;
    let mut end = 0;
    let mut best = f64::INFINITY;
    for j in 0..m {
        let total = dp[last_mask * m + j] + costs.get(j + 1, 0);
        if total < best {
            best = total;
            end = j;
        }
    }
    let mut rev = Vec::with_capacity(n);
    let mut mask = last_mask;
    let mut j = end;
    loop {
        rev.push(j + 1);
        let p = parent[mask * m + j];
        mask &= !(1 << j);
        if p == u8::MAX {
            break;
        }
        j = p as usize;
    }
    rev.push(0);
    rev.reverse();
    Ok(finish(rev, &costs, metric, ExactAlgorithm::HeldKarp, start))
}

/// Held-Karp when it fits, otherwise an error.
pub fn optimal_tour(inst: &Instance, metric: Metric) -> Result<ExactResult> {
    held_karp(inst, metric)
}

/// Minimum spanning tree weight by dense Prim.
pub fn mst_length(inst: &Instance, metric: Metric) -> Result<f64> {
    let n = inst.n();
    if n < 2 {
        return Err(invalid(format!("spanning tree needs n ≥ 2, got {n}")));
    }
    Ok(mst_length_with(&CostTable::new(inst, metric)))
}

pub(crate) fn mst_length_with(costs: &CostTable) -> f64 {
    let n = costs.len();
    let mut in_tree = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    dist[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || dist[v] < dist[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        total += dist[u];
        for v in 0..n {
            if !in_tree[v] {
                let d = costs.get(u, v);
                if d < dist[v] {
                    dist[v] = d;
                }
            }
        }
    }
    total
}

/// Final lengths of `restarts` runs from random tours, run `k` using seed
/// `derive_seed(seed, [k])`, so a longer list extends a shorter one.
pub fn two_opt_restart_lengths(
    inst: &Instance,
    metric: Metric,
    restarts: usize,
    pivot: PivotRule,
    eps: f64,
    seed: u64,
) -> Result<Vec<f64>> {
    if restarts == 0 {
        return Err(invalid("restarts must be ≥ 1"));
    }
    let costs = CostTable::new(inst, metric);
    (0..restarts as u64)
        .map(|k| {
            let cfg = RunConfig {
                metric,
                init: InitRule::Random,
                pivot,
                eps,
                seed: derive_seed(seed, &[k]),
                ..RunConfig::default()
            };
            run_two_opt_with(&costs, &cfg).map(|r| r.final_length)
        })
        .collect()
}

/// Longest 2-optimal tour found over `restarts` random restarts.
pub fn estimate_two_opt_max(
    inst: &Instance,
    metric: Metric,
    restarts: usize,
    pivot: PivotRule,
    eps: f64,
    seed: u64,
) -> Result<f64> {
    let lengths = two_opt_restart_lengths(inst, metric, restarts, pivot, eps, seed)?;
    Ok(lengths.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    /// Edges with length in `[opt/2^bin, opt/2^(bin−1))`.
    pub bin: i32,
    pub total_length: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeHistogram {
    /// Nonempty bins in increasing `bin` order.
    pub bins: Vec<HistogramBin>,
    /// Zero-length edges, which fall in no bin.
    pub zero_length_edges: usize,
}

impl EdgeHistogram {
    pub fn total_length(&self) -> f64 {
        self.bins.iter().map(|b| b.total_length).sum()
    }

    /// `max_i L(T_i) / opt`.
    pub fn max_bin_share(&self, opt_length: f64) -> f64 {
        self.bins.iter().map(|b| b.total_length).fold(0.0, f64::max) / opt_length
    }
}

/// The bin `i` with `opt/2^i ≤ len < opt/2^(i−1)`; a length on a boundary goes
/// to the smaller index. Scaling by powers of two is exact, so boundaries are
/// decided without rounding.
pub fn edge_bin(len: f64, opt_length: f64) -> i32 {
    debug_assert!(len > 0.0 && opt_length > 0.0);
    let mut i = (opt_length / len).log2().floor() as i32 + 1;
    // Correct any off-by-one from the logarithm.
    while scale2(len, i) < opt_length {
        i += 1;
    }
    while scale2(len, i - 1) >= opt_length {
        i -= 1;
    }
    i
}

fn scale2(x: f64, e: i32) -> f64 {
    x * 2f64.powi(e)
}

pub fn edge_length_histogram(tour: &Tour, inst: &Instance, metric: Metric, opt_length: f64) -> Result<EdgeHistogram> {
    if !(opt_length > 0.0 && opt_length.is_finite()) {
        return Err(invalid(format!("opt_length must be positive, got {opt_length}")));
    }
    if tour.len() != inst.n() {
        return Err(invalid("tour and instance sizes differ"));
    }
    let mut bins: Vec<HistogramBin> = Vec::new();
    let mut zero = 0;
    for k in 0..tour.len() {
        let (a, b) = tour.edge_at(k);
        let len = metric.eval(&inst.points[a].coords, &inst.points[b].coords);
        if len == 0.0 {
            zero += 1;
            continue;
        }
        let bin = edge_bin(len, opt_length);
        match bins.binary_search_by_key(&bin, |b| b.bin) {
            Ok(idx) => {
                bins[idx].total_length += len;
                bins[idx].count += 1;
            }
            Err(idx) => bins.insert(
                idx,
                HistogramBin {
                    bin,
                    total_length: len,
                    count: 1,
                },
            ),
        }
    }
    Ok(EdgeHistogram {
        bins,
        zero_length_edges: zero,
    })
}
