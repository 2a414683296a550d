//! Tours, initial-tour rules and the instrumented 2-opt runner.
//!
//! A tour is stored as an array of vertices plus the inverse position index.
//! A 2-change on the edges at positions `i < j` reverses `order[i+1..=j]`; the
//! part of the array outside that window never moves, which the incremental
//! first-improvement scanner relies on.

mod costs;
mod init;
mod run;
mod search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use costs::{CostTable, DENSE_LIMIT};
pub use init::initial_tour;
pub(crate) use run::run_two_opt_with;
pub use run::{run_two_opt, RunConfig, RunRecord};
pub use search::{
    find_improving, first_improving_from_scratch, max_violation, min_improvement, pair_gain, valid_pair, Violation,
};

use crate::error::{invalid, Error, Result};
use crate::geometry::Metric;
use crate::stochastic::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRule {
    Random,
    NearestNeighbor,
    GreedyInsertion,
}

impl InitRule {
    pub fn as_str(self) -> &'static str {
        match self {
            InitRule::Random => "random",
            InitRule::NearestNeighbor => "nn",
            InitRule::GreedyInsertion => "greedy",
        }
    }
}

impl fmt::Display for InitRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(InitRule::Random),
            "nn" | "nearest_neighbor" => Ok(InitRule::NearestNeighbor),
            "greedy" | "greedy_insertion" => Ok(InitRule::GreedyInsertion),
            other => Err(invalid(format!("unknown init rule `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PivotRule {
    First,
    Best,
    Random,
}

impl PivotRule {
    pub const ALL: [PivotRule; 3] = [PivotRule::First, PivotRule::Best, PivotRule::Random];

    pub fn as_str(self) -> &'static str {
        match self {
            PivotRule::First => "first",
            PivotRule::Best => "best",
            PivotRule::Random => "random",
        }
    }
}

impl fmt::Display for PivotRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PivotRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(PivotRule::First),
            "best" => Ok(PivotRule::Best),
            "random" => Ok(PivotRule::Random),
            other => Err(invalid(format!("unknown pivot rule `{other}`"))),
        }
    }
}

/// An undirected edge, stored with the smaller endpoint first.
pub type Edge = (usize, usize);

#[inline]
pub fn edge(a: usize, b: usize) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Replacement of `{x1,x2}`, `{x3,x4}` by `{x1,x3}`, `{x2,x4}`, where
/// `x1, x2, x3, x4` appear in this order along the tour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoChange {
    pub removed: [(usize, usize); 2],
    pub added: [(usize, usize); 2],
    pub gain: f64,
}

impl TwoChange {
    pub fn new(x1: usize, x2: usize, x3: usize, x4: usize, gain: f64) -> Self {
        Self {
            removed: [(x1, x2), (x3, x4)],
            added: [(x1, x3), (x2, x4)],
            gain,
        }
    }

    /// The change that undoes this one.
    pub fn inverse(&self) -> Self {
        Self {
            removed: self.added,
            added: self.removed,
            gain: -self.gain,
        }
    }

    pub fn removed_edges(&self) -> [Edge; 2] {
        [
            edge(self.removed[0].0, self.removed[0].1),
            edge(self.removed[1].0, self.removed[1].1),
        ]
    }

    pub fn added_edges(&self) -> [Edge; 2] {
        [
            edge(self.added[0].0, self.added[0].1),
            edge(self.added[1].0, self.added[1].1),
        ]
    }

    pub fn vertices(&self) -> [usize; 4] {
        [
            self.removed[0].0,
            self.removed[0].1,
            self.removed[1].0,
            self.removed[1].1,
        ]
    }
}

fn same_edge_set(a: [Edge; 2], b: [Edge; 2]) -> bool {
    (a[0] == b[0] && a[1] == b[1]) || (a[0] == b[1] && a[1] == b[0])
}

/// A Hamiltonian cycle with its cached length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TourRepr", into = "TourRepr")]
pub struct Tour {
    order: Vec<usize>,
    pos: Vec<usize>,
    length: f64,
    metric: Metric,
}

#[derive(Serialize, Deserialize)]
struct TourRepr {
    order: Vec<usize>,
    length: f64,
    metric: Metric,
}

impl TryFrom<TourRepr> for Tour {
    type Error = Error;
    fn try_from(r: TourRepr) -> Result<Self> {
        let pos = inverse_permutation(&r.order)?;
        Ok(Tour {
            order: r.order,
            pos,
            length: r.length,
            metric: r.metric,
        })
    }
}

impl From<Tour> for TourRepr {
    fn from(t: Tour) -> Self {
        TourRepr {
            order: t.order,
            length: t.length,
            metric: t.metric,
        }
    }
}

fn inverse_permutation(order: &[usize]) -> Result<Vec<usize>> {
    let n = order.len();
    let mut pos = vec![usize::MAX; n];
    for (k, &v) in order.iter().enumerate() {
        if v >= n {
            return Err(Error::InvalidTour(format!("vertex {v} out of range for n = {n}")));
        }
        if pos[v] != usize::MAX {
            return Err(Error::InvalidTour(format!("vertex {v} visited twice")));
        }
        pos[v] = k;
    }
    Ok(pos)
}

impl Tour {
    /// Validates `order` as a permutation of `0..n` (n ≥ 3) over `inst` and computes its length.
    pub fn new(order: Vec<usize>, inst: &Instance, metric: Metric) -> Result<Self> {
        if order.len() != inst.n() {
            return Err(Error::InvalidTour(format!(
                "tour has {} vertices, instance has {}",
                order.len(),
                inst.n()
            )));
        }
        let length = tour_length(&order, inst, metric)?;
        let pos = inverse_permutation(&order)?;
        Ok(Self {
            order,
            pos,
            length,
            metric,
        })
    }

    pub(crate) fn with_costs(order: Vec<usize>, costs: &CostTable, metric: Metric) -> Self {
        let length = costs.cycle_length(&order);
        let pos = inverse_permutation(&order).expect("internal tours are permutations");
        Self {
            order,
            pos,
            length,
            metric,
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn position(&self, v: usize) -> usize {
        self.pos[v]
    }

    /// Endpoints of the edge leaving position `k`.
    #[inline]
    pub fn edge_at(&self, k: usize) -> (usize, usize) {
        (self.order[k], self.order[(k + 1) % self.order.len()])
    }

    /// Position `k` such that `{order[k], order[k+1]}` is the edge `{a, b}`.
    fn edge_position(&self, a: usize, b: usize) -> Option<usize> {
        let n = self.order.len();
        if a >= n || b >= n {
            return None;
        }
        let (pa, pb) = (self.pos[a], self.pos[b]);
        if (pa + 1) % n == pb {
            Some(pa)
        } else if (pb + 1) % n == pa {
            Some(pb)
        } else {
            None
        }
    }

    /// The 2-change removing the edges at positions `i < j`.
    pub fn change_at(&self, i: usize, j: usize, gain: f64) -> TwoChange {
        let (x1, x2) = self.edge_at(i);
        let (x3, x4) = self.edge_at(j);
        TwoChange::new(x1, x2, x3, x4, gain)
    }

    /// Reverses `order[i+1..=j]` and books `gain` against the cached length.
    pub(crate) fn apply_positions(&mut self, i: usize, j: usize, gain: f64) {
        self.order[i + 1..=j].reverse();
        for k in i + 1..=j {
            self.pos[self.order[k]] = k;
        }
        self.length -= gain;
    }

    /// Applies `change` in place. Fails if a removed edge is not in the tour,
    /// the edges are adjacent, or `added` is not the reconnection that keeps a cycle.
    pub fn apply(&mut self, change: &TwoChange) -> Result<()> {
        let n = self.order.len();
        let [(a, b), (c, d)] = change.removed;
        let e1 = self
            .edge_position(a, b)
            .ok_or_else(|| Error::InvalidTour(format!("edge ({a},{b}) is not in the tour")))?;
        let e2 = self
            .edge_position(c, d)
            .ok_or_else(|| Error::InvalidTour(format!("edge ({c},{d}) is not in the tour")))?;
        let (i, j) = (e1.min(e2), e1.max(e2));
        if !valid_pair(i, j, n) {
            return Err(Error::InvalidTour("removed edges are adjacent or equal".into()));
        }
        let reconnect = self.change_at(i, j, change.gain);
        if !same_edge_set(reconnect.added_edges(), change.added_edges()) {
            return Err(Error::InvalidTour(
                "added edges do not reconnect the tour into a single cycle".into(),
            ));
        }
        self.apply_positions(i, j, change.gain);
        Ok(())
    }

    pub fn recompute_length(&self, inst: &Instance) -> f64 {
        self.order
            .iter()
            .zip(self.order.iter().cycle().skip(1))
            .map(|(&a, &b)| self.metric.eval(inst.coords(a), inst.coords(b)))
            .sum()
    }

    /// Rotates so vertex 0 comes first and orients towards the smaller neighbour.
    pub fn canonical_order(&self) -> Vec<usize> {
        let n = self.order.len();
        let start = self.pos[0];
        let fwd: Vec<usize> = (0..n).map(|k| self.order[(start + k) % n]).collect();
        if n > 2 && fwd[n - 1] < fwd[1] {
            std::iter::once(fwd[0]).chain(fwd[1..].iter().rev().copied()).collect()
        } else {
            fwd
        }
    }
}

/// Returns a copy of `tour` with `change` applied.
pub fn apply_two_change(tour: &Tour, change: &TwoChange) -> Result<Tour> {
    let mut t = tour.clone();
    t.apply(change)?;
    Ok(t)
}

/// Length of the closed cycle `order` over `inst`.
pub fn tour_length(order: &[usize], inst: &Instance, metric: Metric) -> Result<f64> {
    let n = inst.n();
    if n < 3 {
        return Err(Error::InvalidTour(format!("tours need n ≥ 3, got {n}")));
    }
    if order.len() != n {
        return Err(Error::InvalidTour(format!(
            "tour has {} vertices, instance has {n}",
            order.len()
        )));
    }
    inverse_permutation(order)?;
    Ok((0..n)
        .map(|k| metric.eval(inst.coords(order[k]), inst.coords(order[(k + 1) % n])))
        .sum())
}
