//! Linked pairs of 2-changes.
//!
//! Two 2-changes are linked when an edge added by one is removed by the other.
//! Label the first change as replacing `{1,2},{3,4}` by `{1,3},{2,4}` with
//! `{1,3}` the shared edge. The change that removes `{1,3}` also removes a
//! second edge `g`, and the pair's type is `|g ∩ {2,4}|`:
//!
//! * type 0: `{1,3},{5,6}` → `{1,5},{3,6}`
//! * type 1a: `{1,3},{2,5}` → `{1,5},{2,3}`
//! * type 1b: `{1,3},{2,5}` → `{1,2},{3,5}`
//! * type 2: only four vertices are involved.
//!
//! Edges are unordered throughout; the labelling is recovered from the
//! removed/added edge sets.

use std::collections::HashMap;

use petgraph::algo::maximum_matching;
use petgraph::graph::UnGraph;
use serde::{Deserialize, Serialize};

use crate::tour::{edge, Edge, TwoChange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkedPairType {
    Type0,
    Type1a,
    Type1b,
    Type2,
    NotLinked,
}

impl LinkedPairType {
    /// Types 0, 1a and 1b, the ones that count towards disjoint pairs.
    pub fn is_countable(self) -> bool {
        matches!(self, Self::Type0 | Self::Type1a | Self::Type1b)
    }
}

/// Classifies the pair, trying `c1` as the adding change first and then `c2`.
pub fn classify_linked_pair(c1: &TwoChange, c2: &TwoChange) -> LinkedPairType {
    match classify_directed(c1, c2) {
        LinkedPairType::NotLinked => classify_directed(c2, c1),
        t => t,
    }
}

/// `adder` adds an edge that `remover` removes.
fn classify_directed(adder: &TwoChange, remover: &TwoChange) -> LinkedPairType {
    let added = adder.added_edges();
    let removed2 = remover.removed_edges();
    let Some((shared_idx, &shared)) = added.iter().enumerate().find(|(_, e)| removed2.contains(e)) else {
        return LinkedPairType::NotLinked;
    };
    let other_added = added[1 - shared_idx];
    let other_removed = if removed2[0] == shared {
        removed2[1]
    } else {
        removed2[0]
    };

    // Recover the labels 1..4 of the adding change: 1 and 3 are the shared
    // edge's ends, 2 is 1's partner in the removed edges, 4 is 3's.
    let partner = |v: usize| -> Option<usize> {
        adder.removed_edges().iter().find_map(|&(a, b)| {
            if a == v {
                Some(b)
            } else if b == v {
                Some(a)
            } else {
                None
            }
        })
    };
    let (u, v) = shared;
    let (Some(pu), Some(pv)) = (partner(u), partner(v)) else {
        return LinkedPairType::NotLinked;
    };
    debug_assert_eq!(edge(pu, pv), other_added);

    let in_g = |x: usize| other_removed.0 == x || other_removed.1 == x;
    match (in_g(pu), in_g(pv)) {
        (false, false) => LinkedPairType::Type0,
        (true, true) => LinkedPairType::Type2,
        (a_hit, _) => {
            // Orient so the shared vertex of g is "2" (the partner of "1").
            let (one, two, three) = if a_hit { (u, pu, v) } else { (v, pv, u) };
            let five = if other_removed.0 == two {
                other_removed.1
            } else {
                other_removed.0
            };
            let added2 = remover.added_edges();
            let has = |e: Edge| added2.contains(&e);
            if has(edge(one, five)) && has(edge(two, three)) {
                LinkedPairType::Type1a
            } else if has(edge(one, two)) && has(edge(three, five)) {
                LinkedPairType::Type1b
            } else {
                LinkedPairType::NotLinked
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedPair {
    /// Indices into the change sequence, `first < second`.
    pub first: usize,
    pub second: usize,
    pub kind: LinkedPairType,
}

/// A set of change-disjoint countable linked pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisjointPairs {
    pub pairs: Vec<LinkedPair>,
    pub exhaustive: bool,
}

impl DisjointPairs {
    pub fn count(&self) -> usize {
        self.pairs.len()
    }

    /// Every change index appears at most once and every pair is countable.
    pub fn is_valid_for(&self, changes: &[TwoChange]) -> bool {
        let mut used = vec![false; changes.len()];
        for p in &self.pairs {
            if p.first >= p.second || p.second >= changes.len() {
                return false;
            }
            if used[p.first] || used[p.second] {
                return false;
            }
            used[p.first] = true;
            used[p.second] = true;
            let kind = classify_linked_pair(&changes[p.first], &changes[p.second]);
            if kind != p.kind || !kind.is_countable() {
                return false;
            }
        }
        true
    }
}

/// `⌈t/7 − 3n/28⌉ = ⌈(4t − 3n)/28⌉`, the guaranteed number of disjoint pairs.
pub fn linked_pair_lower_bound(t: usize, n: usize) -> i64 {
    let num = 4 * t as i64 - 3 * n as i64;
    num.div_euclid(28) + i64::from(num.rem_euclid(28) != 0)
}

/// Countable linked pairs `(i, j)`, `i < j`, where an edge added at `i` is
/// removed at `j` or an edge removed at `i` is added back at `j`, linking
/// each change to the most recent change that touched the shared edge.
pub fn candidate_pairs(changes: &[TwoChange]) -> Vec<LinkedPair> {
    let mut last_touch: HashMap<Edge, usize> = HashMap::new();
    let mut out = Vec::new();
    for (j, c) in changes.iter().enumerate() {
        let mut seen = Vec::with_capacity(4);
        for e in c.removed_edges().into_iter().chain(c.added_edges()) {
            if let Some(&i) = last_touch.get(&e) {
                if !seen.contains(&i) {
                    seen.push(i);
                    let kind = classify_linked_pair(&changes[i], c);
                    if kind.is_countable() {
                        out.push(LinkedPair {
                            first: i,
                            second: j,
                            kind,
                        });
                    }
                }
            }
        }
        for e in c.removed_edges().into_iter().chain(c.added_edges()) {
            last_touch.insert(e, j);
        }
    }
    out
}

/// Greedy matching over the candidate pairs in sequence order.
pub fn count_disjoint_linked_pairs(changes: &[TwoChange]) -> DisjointPairs {
    let mut used = vec![false; changes.len()];
    let mut pairs = Vec::new();
    let mut candidates = candidate_pairs(changes);
    candidates.sort_by_key(|p| (p.second, p.first));
    for p in candidates {
        if !used[p.first] && !used[p.second] {
            used[p.first] = true;
            used[p.second] = true;
            pairs.push(p);
        }
    }
    pairs.sort_by_key(|p| (p.first, p.second));
    DisjointPairs {
        pairs,
        exhaustive: false,
    }
}

/// Maximum-cardinality set of disjoint candidate pairs (exact general-graph matching).
pub fn max_disjoint_linked_pairs(changes: &[TwoChange]) -> DisjointPairs {
    let candidates = candidate_pairs(changes);
    let mut graph: UnGraph<(), LinkedPairType> = UnGraph::with_capacity(changes.len(), candidates.len());
    let nodes: Vec<_> = (0..changes.len()).map(|_| graph.add_node(())).collect();
    for p in &candidates {
        graph.update_edge(nodes[p.first], nodes[p.second], p.kind);
    }
    let matching = maximum_matching(&graph);
    let mut pairs: Vec<LinkedPair> = matching
        .edges()
        .map(|(a, b)| {
            let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
            let kind = candidates
                .iter()
                .find(|p| p.first == i && p.second == j)
                .map(|p| p.kind)
                .expect("matched edges come from candidates");
            LinkedPair {
                first: i,
                second: j,
                kind,
            }
        })
        .collect();
    pairs.sort_by_key(|p| (p.first, p.second));
    DisjointPairs {
        pairs,
        exhaustive: true,
    }
}

/// Greedy count, replaced by the exact matching when greedy falls below the
/// guaranteed bound and the sequence has at most `exhaustive_limit` changes.
pub fn disjoint_pairs_with_fallback(changes: &[TwoChange], n: usize, exhaustive_limit: usize) -> DisjointPairs {
    let greedy = count_disjoint_linked_pairs(changes);
    if (greedy.count() as i64) < linked_pair_lower_bound(changes.len(), n) && changes.len() <= exhaustive_limit {
        max_disjoint_linked_pairs(changes)
    } else {
        greedy
    }
}
