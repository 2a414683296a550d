use rand::Rng;

use super::{CostTable, PivotRule, Tour, TwoChange};
use crate::error::{invalid, Result};
use crate::geometry::{gain_from_distances, Metric};
use crate::stochastic::rng::{stream_rng, streams};
use crate::stochastic::Instance;

/// Positions `i < j` name two non-adjacent tour edges.
#[inline]
pub fn valid_pair(i: usize, j: usize, n: usize) -> bool {
    i < j && j < n && j >= i + 2 && !(i == 0 && j == n - 1)
}

/// Gain of the 2-change on the edges leaving positions `i` and `j`.
#[inline(always)]
pub fn pair_gain(order: &[usize], costs: &CostTable, i: usize, j: usize) -> f64 {
    let n = order.len();
    let (x1, x2) = (order[i], order[i + 1]);
    let (x3, x4) = (order[j], order[(j + 1) % n]);
    gain_from_distances(
        costs.get(x1, x2),
        costs.get(x3, x4),
        costs.get(x1, x3),
        costs.get(x2, x4),
    )
}

/// Gain of every `j` in `lo..=hi` against the edge at `i`; first one above `eps`.
#[inline]
fn first_in_row(order: &[usize], costs: &CostTable, eps: f64, i: usize, lo: usize, hi: usize) -> Option<(usize, f64)> {
    let n = order.len();
    let lo = lo.max(i + 2);
    let hi = if i == 0 { hi.min(n - 2) } else { hi.min(n - 1) };
    if lo > hi {
        return None;
    }
    let (x1, x2) = (order[i], order[i + 1]);
    let d12 = costs.get(x1, x2);
    for j in lo..=hi {
        let (x3, x4) = (order[j], order[(j + 1) % n]);
        let g = gain_from_distances(d12, costs.get(x3, x4), costs.get(x1, x3), costs.get(x2, x4));
        if g > eps {
            return Some((j, g));
        }
    }
    None
}

/// First improving pair in lexicographic position order, scanning rows `from..`.
fn scan_rows(order: &[usize], costs: &CostTable, eps: f64, from: usize) -> Option<(usize, usize, f64)> {
    let n = order.len();
    for i in from..n.saturating_sub(2) {
        if let Some((j, g)) = first_in_row(order, costs, eps, i, i + 2, n - 1) {
            return Some((i, j, g));
        }
    }
    None
}

/// Reference first-improvement: a full lexicographic scan from `(0, 2)`.
pub fn first_improving_from_scratch(order: &[usize], costs: &CostTable, eps: f64) -> Option<(usize, usize, f64)> {
    scan_rows(order, costs, eps, 0)
}

/// Maximum-gain improving pair; ties go to the lexicographically first.
pub(crate) fn best_improving(order: &[usize], costs: &CostTable, eps: f64) -> Option<(usize, usize, f64)> {
    let n = order.len();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..n.saturating_sub(2) {
        let hi = if i == 0 { n - 2 } else { n - 1 };
        for j in i + 2..=hi {
            let g = pair_gain(order, costs, i, j);
            if g > eps && best.is_none_or(|b| g > b.2) {
                best = Some((i, j, g));
            }
        }
    }
    best
}

pub(crate) fn all_improving(order: &[usize], costs: &CostTable, eps: f64) -> Vec<(usize, usize, f64)> {
    let n = order.len();
    let mut out = Vec::new();
    for i in 0..n.saturating_sub(2) {
        let hi = if i == 0 { n - 2 } else { n - 1 };
        for j in i + 2..=hi {
            let g = pair_gain(order, costs, i, j);
            if g > eps {
                out.push((i, j, g));
            }
        }
    }
    out
}

/// Incremental first-improvement search that returns exactly what
/// [`first_improving_from_scratch`] would on the current tour.
///
/// Invariant: after the scanner reports `(a, b)` and the caller reverses
/// `order[a+1..=b]`, every pair `(i, j)` with `i < a` was non-improving
/// before the move. Of those, only pairs with `j ∈ [a, b]` saw any of their
/// four vertices change, so they are the only ones rechecked before the full
/// scan resumes at row `a`.
#[derive(Debug, Default)]
pub(crate) struct FirstScanner {
    last: Option<(usize, usize)>,
}

impl FirstScanner {
    pub(crate) fn next(&mut self, order: &[usize], costs: &CostTable, eps: f64) -> Option<(usize, usize, f64)> {
        let found = match self.last {
            None => scan_rows(order, costs, eps, 0),
            Some((a, b)) => (0..a)
                .find_map(|i| first_in_row(order, costs, eps, i, a, b).map(|(j, g)| (i, j, g)))
                .or_else(|| scan_rows(order, costs, eps, a)),
        };
        self.last = found.map(|(i, j, _)| (i, j));
        found
    }
}

/// One improving 2-change under `pivot`, or `None` iff the tour is 2-optimal at `eps`.
///
/// `Random` picks uniformly among all improving changes using the pivot
/// stream of `seed`.
pub fn find_improving(
    tour: &Tour,
    inst: &Instance,
    metric: Metric,
    pivot: PivotRule,
    eps: f64,
    seed: u64,
) -> Result<Option<TwoChange>> {
    if tour.len() != inst.n() {
        return Err(invalid("tour and instance sizes differ"));
    }
    let costs = CostTable::new(inst, metric);
    let found = match pivot {
        PivotRule::First => first_improving_from_scratch(tour.order(), &costs, eps),
        PivotRule::Best => best_improving(tour.order(), &costs, eps),
        PivotRule::Random => {
            let all = all_improving(tour.order(), &costs, eps);
            if all.is_empty() {
                None
            } else {
                let k = stream_rng(seed, streams::PIVOT).random_range(0..all.len());
                Some(all[k])
            }
        }
    };
    Ok(found.map(|(i, j, g)| tour.change_at(i, j, g)))
}

/// A pair of tour edges whose 2-change improves the tour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub positions: (usize, usize),
    pub change: TwoChange,
}

/// All-pairs check: the maximum-gain pair with gain above `eps`, if any.
pub fn max_violation(order: &[usize], costs: &CostTable, eps: f64) -> Option<Violation> {
    let (i, j, g) = best_improving(order, costs, eps)?;
    let n = order.len();
    Some(Violation {
        positions: (i, j),
        change: TwoChange::new(order[i], order[i + 1], order[j], order[(j + 1) % n], g),
    })
}

/// Smallest gain above `eps` over all ordered quadruples of distinct
/// vertices, i.e. over every 2-change of every tour on the instance.
pub fn min_improvement(inst: &Instance, metric: Metric, eps: f64) -> Result<Option<f64>> {
    let n = inst.n();
    if n < 4 {
        return Err(invalid(format!("no 2-change exists on {n} points")));
    }
    let costs = CostTable::new(inst, metric);
    let mut best: Option<f64> = None;
    for x1 in 0..n {
        for x2 in 0..n {
            if x2 == x1 {
                continue;
            }
            let d12 = costs.get(x1, x2);
            for x3 in 0..n {
                if x3 == x1 || x3 == x2 {
                    continue;
                }
                let d13 = costs.get(x1, x3);
                for x4 in 0..n {
                    if x4 == x1 || x4 == x2 || x4 == x3 {
                        continue;
                    }
                    let g = gain_from_distances(d12, costs.get(x3, x4), d13, costs.get(x2, x4));
                    if g > eps && best.is_none_or(|b| g < b) {
                        best = Some(g);
                    }
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::uniform_origins;
    use approx::assert_relative_eq;

    fn square() -> Instance {
        Instance::from_coords(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn crossing_square_has_unique_move() {
        let inst = square();
        let tour = Tour::new(vec![0, 2, 1, 3], &inst, Metric::Euclidean).unwrap();
        for pivot in PivotRule::ALL {
            let ch = find_improving(&tour, &inst, Metric::Euclidean, pivot, 1e-12, 1)
                .unwrap()
                .unwrap();
            assert_relative_eq!(ch.gain, 2.0 * 2f64.sqrt() - 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn convex_hull_order_is_two_optimal() {
        let pts: Vec<[f64; 2]> = (0..9)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / 9.0;
                [a.cos() * (1.0 + 0.1 * k as f64), a.sin()]
            })
            .collect();
        let inst = Instance::from_coords(&pts).unwrap();
        let tour = Tour::new((0..9).collect(), &inst, Metric::Euclidean).unwrap();
        let costs = CostTable::new(&inst, Metric::Euclidean);
        // Exhaustive oracle: every unordered pair of non-adjacent edges.
        for i in 0..9 {
            for j in 0..9 {
                if valid_pair(i, j, 9) {
                    assert!(pair_gain(tour.order(), &costs, i, j) <= 1e-12);
                }
            }
        }
        for pivot in PivotRule::ALL {
            assert!(find_improving(&tour, &inst, Metric::Euclidean, pivot, 1e-12, 0)
                .unwrap()
                .is_none());
        }
    }

    #[test]
    fn best_returns_maximum_gain() {
        let inst = Instance::from_points(uniform_origins(15, 2, 4)).unwrap();
        let costs = CostTable::new(&inst, Metric::Euclidean);
        let order: Vec<usize> = (0..15).collect();
        let best = best_improving(&order, &costs, 1e-12).unwrap();
        let all = all_improving(&order, &costs, 1e-12);
        let max = all.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(best.2, max);
        assert_eq!(
            first_improving_from_scratch(&order, &costs, 1e-12),
            all.first().copied()
        );
    }

    #[test]
    fn min_improvement_square() {
        let g = min_improvement(&square(), Metric::Euclidean, 1e-12).unwrap().unwrap();
        assert_relative_eq!(g, 2.0 * 2f64.sqrt() - 2.0, epsilon = 1e-12);
    }

    #[test]
    fn min_improvement_none_and_errors() {
        // Four coincident points: every gain is zero.
        let inst = Instance::from_coords(&[[0.5, 0.5]; 4]).unwrap();
        assert_eq!(min_improvement(&inst, Metric::Euclidean, 1e-12).unwrap(), None);
        let tri = Instance::from_coords(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(min_improvement(&tri, Metric::Euclidean, 1e-12).is_err());
    }
}
