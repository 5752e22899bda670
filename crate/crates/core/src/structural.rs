//! Classical structural controllability (accessibility plus Hall's condition) and
//! structural ensemble controllability (accessibility plus a cycle cover of the
//! state subgraph), both decided through bipartite matching.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{NodeId, SparsityPattern};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchingResult<T: Ord> {
    pub size: usize,
    pub pairs: BTreeSet<(T, T)>,
    /// Present iff the matching does not saturate the left side; then
    /// `|N(witness)| < |witness|`.
    pub deficiency_witness: Option<BTreeSet<T>>,
}

const FREE: usize = usize::MAX;

/// Maximum matching between `left` and `right` (Hopcroft-Karp).
///
/// When the left side is not saturated, the returned witness is the largest
/// left set of maximal deficiency: the complement of everything reachable by
/// alternating paths from unmatched right vertices.
pub fn max_bipartite_matching<T>(left: &[T], right: &[T], adjacency: &[(T, T)]) -> MatchingResult<T>
where
    T: Ord + Copy,
{
    let left_pos: BTreeMap<T, usize> = left.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let right_pos: BTreeMap<T, usize> = right.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![Vec::new(); left.len()];
    for (l, r) in adjacency {
        if let (Some(&i), Some(&j)) = (left_pos.get(l), right_pos.get(r)) {
            adj[i].push(j);
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }

    let (match_left, match_right) = hopcroft_karp(&adj, right.len());

    let pairs: BTreeSet<(T, T)> = match_left
        .iter()
        .enumerate()
        .filter(|(_, &j)| j != FREE)
        .map(|(i, &j)| (left[i], right[j]))
        .collect();
    let size = pairs.len();

    let deficiency_witness = (size < left.len()).then(|| {
        // reverse adjacency: right -> left
        let mut radj = vec![Vec::new(); right.len()];
        for (i, list) in adj.iter().enumerate() {
            for &j in list {
                radj[j].push(i);
            }
        }
        let mut left_reached = vec![false; left.len()];
        let mut right_reached = vec![false; right.len()];
        let mut queue: VecDeque<usize> = (0..right.len()).filter(|&j| match_right[j] == FREE).collect();
        for &j in &queue {
            right_reached[j] = true;
        }
        while let Some(j) = queue.pop_front() {
            for &i in &radj[j] {
                if match_right[j] == i || left_reached[i] {
                    continue;
                }
                left_reached[i] = true;
                let partner = match_left[i];
                if partner != FREE && !right_reached[partner] {
                    right_reached[partner] = true;
                    queue.push_back(partner);
                }
            }
        }
        (0..left.len())
            .filter(|&i| !left_reached[i])
            .map(|i| left[i])
            .collect()
    });

    MatchingResult {
        size,
        pairs,
        deficiency_witness,
    }
}

fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> (Vec<usize>, Vec<usize>) {
    let n_left = adj.len();
    let mut match_left = vec![FREE; n_left];
    let mut match_right = vec![FREE; n_right];
    let mut dist = vec![0usize; n_left];
    loop {
        let mut queue = VecDeque::new();
        for i in 0..n_left {
            if match_left[i] == FREE {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                let k = match_right[j];
                if k == FREE {
                    found = true;
                } else if dist[k] == usize::MAX {
                    dist[k] = dist[i] + 1;
                    queue.push_back(k);
                }
            }
        }
        if !found {
            break;
        }
        for i in 0..n_left {
            if match_left[i] == FREE {
                augment(i, adj, &mut match_left, &mut match_right, &mut dist);
            }
        }
    }
    (match_left, match_right)
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &j in &adj[i] {
        let k = match_right[j];
        let ok = k == FREE || (dist[k] == dist[i] + 1 && augment(k, adj, match_left, match_right, dist));
        if ok {
            match_left[i] = j;
            match_right[j] = i;
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StructuralFailure {
    /// α-nodes with no path from any β-node.
    Inaccessible { unreachable: BTreeSet<NodeId> },
    /// A Hall violator `V'` together with `N_in(V')`.
    Deficient {
        subset: BTreeSet<NodeId>,
        in_neighbors: BTreeSet<NodeId>,
    },
    /// No disjoint cycle cover of the α-subgraph; `unmatched` lists α-nodes left
    /// without a successor by a maximum matching.
    NoCycleCover { unmatched: BTreeSet<NodeId> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum StructuralVerdict<W> {
    Holds { witness: W },
    Fails { witness: StructuralFailure },
}

impl<W> StructuralVerdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, StructuralVerdict::Holds { .. })
    }

    pub fn failure(&self) -> Option<&StructuralFailure> {
        match self {
            StructuralVerdict::Holds { .. } => None,
            StructuralVerdict::Fails { witness } => Some(witness),
        }
    }
}

/// Matching of the Hall bipartite graph: left = α-nodes (edge heads), right =
/// all nodes (edge tails), `(v, w)` adjacent iff `w -> v` is an edge.
pub fn hall_matching(g: &SparsityPattern) -> MatchingResult<NodeId> {
    let left: Vec<NodeId> = g.alpha_nodes().collect();
    let right: Vec<NodeId> = g.nodes().collect();
    let adjacency: Vec<(NodeId, NodeId)> = g.edges().map(|(from, to)| (to, from)).collect();
    max_bipartite_matching(&left, &right, &adjacency)
}

/// Accessibility and Hall's condition. On success the witness is the saturating
/// matching as `(alpha, in-neighbor)` pairs.
pub fn structural_controllable(g: &SparsityPattern) -> StructuralVerdict<BTreeSet<(NodeId, NodeId)>> {
    let acc = g.accessibility();
    if !acc.accessible {
        return StructuralVerdict::Fails {
            witness: StructuralFailure::Inaccessible {
                unreachable: acc.unreachable,
            },
        };
    }
    let matching = hall_matching(g);
    match matching.deficiency_witness {
        None => StructuralVerdict::Holds {
            witness: matching.pairs,
        },
        Some(subset) => {
            let in_neighbors = g.in_neighbors(&subset).expect("witness nodes belong to g");
            StructuralVerdict::Fails {
                witness: StructuralFailure::Deficient { subset, in_neighbors },
            }
        }
    }
}

/// A permutation of α-indices whose graph is a disjoint union of directed cycles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleCover {
    /// `successor[i - 1] = j` means the edge `a_i -> a_j` is used.
    pub successor: Vec<usize>,
    pub cycles: Vec<Vec<usize>>,
}

impl CycleCover {
    fn from_successors(successor: Vec<usize>) -> Self {
        let n = successor.len();
        let mut seen = vec![false; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                cycle.push(v + 1);
                v = successor[v] - 1;
            }
            cycles.push(cycle);
        }
        CycleCover { successor, cycles }
    }

    /// Every pair is an edge of `g` and the successors form a permutation.
    pub fn is_valid_for(&self, g: &SparsityPattern) -> bool {
        let n = g.n();
        if self.successor.len() != n {
            return false;
        }
        let mut hit = vec![false; n];
        for (i, &j) in self.successor.iter().enumerate() {
            if j == 0 || j > n || hit[j - 1] || !g.has_edge(NodeId::alpha(i + 1), NodeId::alpha(j)) {
                return false;
            }
            hit[j - 1] = true;
        }
        true
    }
}

/// Decides whether the α-induced subgraph admits a disjoint cycle cover.
pub fn cycle_cover(g: &SparsityPattern) -> Result<CycleCover, BTreeSet<NodeId>> {
    let nodes: Vec<usize> = (1..=g.n()).collect();
    let adjacency: Vec<(usize, usize)> = g
        .edges()
        .filter(|(a, b)| a.is_alpha() && b.is_alpha())
        .map(|(a, b)| (a.index, b.index))
        .collect();
    // left copy = source, right copy = target
    let matching = max_bipartite_matching(&nodes, &nodes, &adjacency);
    if matching.size == g.n() {
        let mut successor = vec![0; g.n()];
        for (i, j) in matching.pairs {
            successor[i - 1] = j;
        }
        Ok(CycleCover::from_successors(successor))
    } else {
        let matched: BTreeSet<usize> = matching.pairs.iter().map(|(i, _)| *i).collect();
        Err(nodes
            .into_iter()
            .filter(|i| !matched.contains(i))
            .map(NodeId::alpha)
            .collect())
    }
}

/// Accessibility plus a cycle cover of the state subgraph.
pub fn structural_ensemble_controllable(g: &SparsityPattern) -> StructuralVerdict<CycleCover> {
    let acc = g.accessibility();
    if !acc.accessible {
        return StructuralVerdict::Fails {
            witness: StructuralFailure::Inaccessible {
                unreachable: acc.unreachable,
            },
        };
    }
    match cycle_cover(g) {
        Ok(cover) => StructuralVerdict::Holds { witness: cover },
        Err(unmatched) => StructuralVerdict::Fails {
            witness: StructuralFailure::NoCycleCover { unmatched },
        },
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("subset enumeration refused: n = {n} exceeds limit {limit}")]
pub struct LimitExceeded {
    pub n: usize,
    pub limit: usize,
}

pub const DEFAULT_HALL_LIMIT: usize = 16;

/// Checks `|N_in(V')| >= |V'|` over every nonempty subset of α-nodes. Subsets are
/// visited in decreasing bitmask order (the full set first); the first violator is
/// returned.
pub fn brute_force_hall(g: &SparsityPattern, limit: usize) -> Result<Option<BTreeSet<NodeId>>, LimitExceeded> {
    let n = g.n();
    if n > limit {
        return Err(LimitExceeded { n, limit });
    }
    if n + g.m() > 64 {
        // too many nodes for a u64 neighbor mask
        for mask in (1u64..(1u64 << n)).rev() {
            let subset = alpha_subset(mask, n);
            if g.in_neighbors(&subset).expect("subset of g").len() < subset.len() {
                return Ok(Some(subset));
            }
        }
        return Ok(None);
    }
    // in-neighbor bitmasks over all n + m nodes
    let mut in_mask = vec![0u64; n];
    for (from, to) in g.edges() {
        let bit = if from.is_alpha() { from.index - 1 } else { n + from.index - 1 };
        in_mask[to.index - 1] |= 1u64 << bit;
    }
    for mask in (1u64..(1u64 << n)).rev() {
        let neighbors = (0..n)
            .filter(|v| mask >> v & 1 == 1)
            .fold(0u64, |acc, v| acc | in_mask[v]);
        if neighbors.count_ones() < mask.count_ones() {
            return Ok(Some(alpha_subset(mask, n)));
        }
    }
    Ok(None)
}

fn alpha_subset(mask: u64, n: usize) -> BTreeSet<NodeId> {
    (0..n)
        .filter(|v| mask >> v & 1 == 1)
        .map(|v| NodeId::alpha(v + 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn set(nodes: &[&str]) -> BTreeSet<NodeId> {
        nodes.iter().map(|s| s.parse().unwrap()).collect()
    }

    #[test]
    fn fan_out_hall_matching() {
        let g = fan_out_with_loop();
        let m = hall_matching(&g);
        assert_eq!(m.size, 2);
        let witness = m.deficiency_witness.unwrap();
        assert_eq!(witness, set(&["a1", "a2", "a3"]));
        assert_eq!(g.in_neighbors(&witness).unwrap().len(), 2);
    }

    #[test]
    fn empty_adjacency() {
        let left = [1, 2, 3];
        let right = [4, 5];
        let m = max_bipartite_matching::<i32>(&left, &right, &[]);
        assert_eq!(m.size, 0);
        assert_eq!(m.deficiency_witness.unwrap(), left.into_iter().collect());
    }

    #[test]
    fn path_matching_saturates() {
        let g = path3();
        let m = hall_matching(&g);
        assert_eq!(m.size, 3);
        assert!(m.deficiency_witness.is_none());
        let expected: BTreeSet<_> = [("a1", "b1"), ("a2", "a1"), ("a3", "a2")]
            .iter()
            .map(|(a, b)| (a.parse().unwrap(), b.parse().unwrap()))
            .collect();
        assert_eq!(m.pairs, expected);
    }

    #[test]
    fn structural_examples() {
        let v = structural_controllable(&fan_out_with_loop());
        assert!(matches!(v.failure(), Some(StructuralFailure::Deficient { subset, in_neighbors })
            if subset.len() == 3 && in_neighbors.len() == 2));
        assert!(structural_controllable(&path3()).holds());
        let g = SparsityPattern::from_names(2, 1, &[("b1", "a1")]);
        assert!(matches!(
            structural_controllable(&g).failure(),
            Some(StructuralFailure::Inaccessible { unreachable }) if *unreachable == set(&["a2"])
        ));
    }

    #[test]
    fn ensemble_examples() {
        match structural_ensemble_controllable(&cycle3()) {
            StructuralVerdict::Holds { witness } => {
                assert_eq!(witness.successor, vec![2, 3, 1]);
                assert_eq!(witness.cycles, vec![vec![1, 2, 3]]);
                assert!(witness.is_valid_for(&cycle3()));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(!structural_ensemble_controllable(&path3()).holds());
        assert!(!structural_ensemble_controllable(&fan_out_with_loop()).holds());
    }

    #[test]
    fn brute_force_examples() {
        let g = fan_out_with_loop();
        assert_eq!(brute_force_hall(&g, 16).unwrap(), Some(set(&["a1", "a2", "a3"])));
        let g = SparsityPattern::from_names(1, 1, &[("b1", "a1")]);
        assert_eq!(brute_force_hall(&g, 16).unwrap(), None);
        let big = SparsityPattern::new(17, 1, []).unwrap();
        assert_eq!(brute_force_hall(&big, 16).unwrap_err(), LimitExceeded { n: 17, limit: 16 });
    }
}
