use rand::seq::SliceRandom;

use super::{CostTable, InitRule, Tour};
use crate::error::{Error, Result};
use crate::geometry::Metric;
use crate::stochastic::rng::{stream_rng, streams};
use crate::stochastic::Instance;

/// Builds a starting tour. `Random` shuffles with the init stream of `seed`;
/// the two constructive rules start at vertex 0 and break ties by lowest index.
pub fn initial_tour(inst: &Instance, metric: Metric, rule: InitRule, seed: u64) -> Result<Tour> {
    let costs = CostTable::new(inst, metric);
    initial_tour_with(&costs, metric, rule, seed)
}

pub(crate) fn initial_tour_with(costs: &CostTable, metric: Metric, rule: InitRule, seed: u64) -> Result<Tour> {
    let n = costs.len();
    if n < 3 {
        return Err(Error::InvalidTour(format!("tours need n ≥ 3, got {n}")));
    }
    let order = match rule {
        InitRule::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream_rng(seed, streams::INIT));
            order
        }
        InitRule::NearestNeighbor => nearest_neighbor(costs),
        InitRule::GreedyInsertion => cheapest_insertion(costs),
    };
    Ok(Tour::with_costs(order, costs, metric))
}

fn nearest_neighbor(costs: &CostTable) -> Vec<usize> {
    let n = costs.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    visited[0] = true;
    order.push(0);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for (v, &seen) in visited.iter().enumerate() {
            if !seen {
                let d = costs.get(cur, v);
                if d < best_d {
                    best_d = d;
                    best = v;
                }
            }
        }
        visited[best] = true;
        order.push(best);
        cur = best;
    }
    order
}

/// Cheapest insertion seeded with vertex 0 and its nearest neighbour.
///
/// Every outside vertex caches its cheapest insertion edge (named by the
/// edge's tail in `next`). After an insertion only vertices whose cached edge
/// was destroyed are rescanned; the rest compare against the two new edges.
fn cheapest_insertion(costs: &CostTable) -> Vec<usize> {
    let n = costs.len();
    let mut next = vec![usize::MAX; n];
    let mut in_tour = vec![false; n];

    let first = (1..n)
        .min_by(|&a, &b| costs.get(0, a).total_cmp(&costs.get(0, b)))
        .expect("n ≥ 3");
    next[0] = first;
    next[first] = 0;
    in_tour[0] = true;
    in_tour[first] = true;
    let mut members = vec![0, first];

    let insertion = |u: usize, w: usize, x: usize| costs.get(u, x) + costs.get(x, w) - costs.get(u, w);

    let mut best_cost = vec![f64::INFINITY; n];
    let mut best_tail = vec![usize::MAX; n];
    let rescan = |x: usize, members: &[usize], next: &[usize], best_cost: &mut [f64], best_tail: &mut [usize]| {
        best_cost[x] = f64::INFINITY;
        for &u in members {
            let c = insertion(u, next[u], x);
            if c < best_cost[x] || (c == best_cost[x] && u < best_tail[x]) {
                best_cost[x] = c;
                best_tail[x] = u;
            }
        }
    };
    for (x, &inside) in in_tour.iter().enumerate() {
        if !inside {
            rescan(x, &members, &next, &mut best_cost, &mut best_tail);
        }
    }

    for _ in 2..n {
        let mut v = usize::MAX;
        for x in 0..n {
            if !in_tour[x] && (v == usize::MAX || best_cost[x] < best_cost[v]) {
                v = x;
            }
        }
        let u = best_tail[v];
        let w = next[u];
        next[u] = v;
        next[v] = w;
        in_tour[v] = true;
        members.push(v);

        for x in 0..n {
            if in_tour[x] {
                continue;
            }
            if best_tail[x] == u {
                rescan(x, &members, &next, &mut best_cost, &mut best_tail);
            } else {
                for tail in [u, v] {
                    let c = insertion(tail, next[tail], x);
                    if c < best_cost[x] || (c == best_cost[x] && tail < best_tail[x]) {
                        best_cost[x] = c;
                        best_tail[x] = tail;
                    }
                }
            }
        }
    }

    let mut order = Vec::with_capacity(n);
    let mut cur = 0;
    for _ in 0..n {
        order.push(cur);
        cur = next[cur];
    }
    order
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::uniform_origins;

    #[test]
    fn random_triangle_is_its_perimeter() {
        let inst = Instance::from_coords(&[[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]]).unwrap();
        let t = initial_tour(&inst, Metric::Euclidean, InitRule::Random, 5).unwrap();
        assert_eq!(t.length(), 12.0);
    }

    #[test]
    fn nearest_neighbor_walks_a_line_in_order() {
        let inst = Instance::from_coords(&[[0.0], [3.0], [1.0], [4.0], [2.0]]).unwrap();
        let t = initial_tour(&inst, Metric::Euclidean, InitRule::NearestNeighbor, 0).unwrap();
        assert_eq!(t.order(), &[0, 2, 4, 1, 3]);
    }

    #[test]
    fn greedy_insertion_on_square_is_optimal() {
        let inst = Instance::from_coords(&[[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        // The three distinct 4-cycles have lengths 4, 2 + 2√2, 2 + 2√2.
        let t = initial_tour(&inst, Metric::Euclidean, InitRule::GreedyInsertion, 0).unwrap();
        assert_eq!(t.length(), 4.0);
    }

    #[test]
    fn constructions_are_valid_and_deterministic() {
        let inst = Instance::from_points(uniform_origins(60, 2, 2)).unwrap();
        for rule in [InitRule::Random, InitRule::NearestNeighbor, InitRule::GreedyInsertion] {
            let a = initial_tour(&inst, Metric::Euclidean, rule, 9).unwrap();
            let b = initial_tour(&inst, Metric::Euclidean, rule, 9).unwrap();
            assert_eq!(a, b);
            let mut seen = a.order().to_vec();
            seen.sort_unstable();
            assert_eq!(seen, (0..60).collect::<Vec<_>>());
        }
    }

    #[test]
    fn insertion_matches_naive_cheapest_insertion() {
        let inst = Instance::from_points(uniform_origins(25, 2, 13)).unwrap();
        let costs = CostTable::new(&inst, Metric::Euclidean);
        let fast = cheapest_insertion(&costs);

        // Naive O(n³) reference with the same seeding and tie-breaks.
        let n = 25;
        let first = (1..n)
            .min_by(|&a, &b| costs.get(0, a).total_cmp(&costs.get(0, b)))
            .unwrap();
        let mut cycle = vec![0, first];
        let mut outside: Vec<usize> = (0..n).filter(|&x| x != 0 && x != first).collect();
        while !outside.is_empty() {
            let mut best = (f64::INFINITY, usize::MAX, usize::MAX, usize::MAX);
            for &x in &outside {
                for k in 0..cycle.len() {
                    let (u, w) = (cycle[k], cycle[(k + 1) % cycle.len()]);
                    let c = costs.get(u, x) + costs.get(x, w) - costs.get(u, w);
                    if c < best.0 || (c == best.0 && (x, u) < (best.1, best.2)) {
                        best = (c, x, u, k);
                    }
                }
            }
            cycle.insert(best.3 + 1, best.1);
            outside.retain(|&x| x != best.1);
        }
        assert_eq!(costs.cycle_length(&fast), costs.cycle_length(&cycle));
    }
}
