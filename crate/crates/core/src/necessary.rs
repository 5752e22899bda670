//! Necessary conditions for structural averaged controllability.
//!
//! Every test here is one-directional: a failure certifies that no compliant pair
//! is averaged controllable, a pass says nothing.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{NodeId, SparsityPattern};

/// `U_α(k)`: α-nodes that no walk of length greater than `k` from a β-node reaches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct UnreachableProfile {
    pub sets: Vec<(usize, BTreeSet<NodeId>)>,
    /// Smallest `k` after which `U_α` no longer changes.
    pub stabilization_k: usize,
}

impl UnreachableProfile {
    pub fn at(&self, k: usize) -> Option<&BTreeSet<NodeId>> {
        self.sets.get(k).map(|(_, s)| s)
    }
}

pub fn unreachable_set(g: &SparsityPattern, k: usize) -> BTreeSet<NodeId> {
    let reach = g.walk_reach_closure(k);
    g.alpha_nodes().filter(|v| !reach.contains(v)).collect()
}

/// Default scan horizon `⌈n/m⌉ + 1`.
pub fn default_k_max(g: &SparsityPattern) -> usize {
    g.n().div_ceil(g.m()) + 1
}

/// `U_α(k)` for `k = 0..=k_max`. The sets only grow with `k` and, once two
/// consecutive sets agree, never change again, which happens by `k = n`.
pub fn unreachable_profile(g: &SparsityPattern, k_max: usize) -> UnreachableProfile {
    let sets: Vec<(usize, BTreeSet<NodeId>)> = (0..=k_max).map(|k| (k, unreachable_set(g, k))).collect();
    let mut stabilization_k = 0;
    let mut prev = unreachable_set(g, 0);
    for k in 1..=g.n() + 1 {
        let cur = sets.get(k).map_or_else(|| unreachable_set(g, k), |(_, s)| s.clone());
        if cur == prev {
            break;
        }
        stabilization_k = k;
        prev = cur;
    }
    UnreachableProfile { sets, stabilization_k }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum NecessaryVerdict<W> {
    FailsNecessary { witness: W },
    PassesNecessary,
    Inconclusive { reason: String },
}

impl<W> NecessaryVerdict<W> {
    pub fn fails(&self) -> bool {
        matches!(self, NecessaryVerdict::FailsNecessary { .. })
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            NecessaryVerdict::FailsNecessary { witness } => Some(witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountingWitness {
    pub k: usize,
    pub unreachable: BTreeSet<NodeId>,
    /// `m·k`, the bound exceeded by `|U_α(k)|`.
    pub bound: usize,
}

/// Looks for `k` with `|U_α(k)| > m·k`. Only `k <= ⌈n/m⌉` can violate the bound.
/// The first (smallest) violating `k` is reported.
pub fn counting_test(g: &SparsityPattern) -> NecessaryVerdict<CountingWitness> {
    let k_max = g.n().div_ceil(g.m());
    for k in 0..=k_max {
        let unreachable = unreachable_set(g, k);
        let bound = g.m() * k;
        if unreachable.len() > bound {
            return NecessaryVerdict::FailsNecessary {
                witness: CountingWitness { k, unreachable, bound },
            };
        }
    }
    NecessaryVerdict::PassesNecessary
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AcyclicTrapWitness {
    pub subset: BTreeSet<NodeId>,
    pub beta: NodeId,
    pub in_neighbors: BTreeSet<NodeId>,
}

pub const DEFAULT_TRAP_LIMIT: usize = 20;

/// Checks one candidate: `N_in(V') ⊆ V' ∪ {β}`, `|N_in(V')| < |V'|`, and the
/// subgraph induced by `V'` is acyclic (self-loops count as cycles).
pub fn check_acyclic_trap(g: &SparsityPattern, subset: &BTreeSet<NodeId>, beta: NodeId) -> Option<AcyclicTrapWitness> {
    if subset.is_empty() || !beta.is_beta() || !g.contains(beta) || subset.iter().any(|v| !v.is_alpha()) {
        return None;
    }
    let in_neighbors = g.in_neighbors(subset).ok()?;
    let closed = in_neighbors.iter().all(|v| *v == beta || subset.contains(v));
    if !closed || in_neighbors.len() >= subset.len() {
        return None;
    }
    let members: Vec<usize> = subset.iter().map(|v| v.index - 1).collect();
    g.induced_alpha_acyclic(&members).then(|| AcyclicTrapWitness {
        subset: subset.clone(),
        beta,
        in_neighbors,
    })
}

/// Exhaustive search over nonempty `V' ⊆ V_α` (ascending bitmask order) and β-nodes
/// (ascending index) for a deficient, closed, acyclic trap. Above `limit` states
/// the search is skipped and the verdict is inconclusive; a pass never certifies
/// anything.
pub fn acyclic_trap_search(g: &SparsityPattern, limit: usize) -> NecessaryVerdict<AcyclicTrapWitness> {
    let n = g.n();
    if n > limit || n >= 63 {
        return NecessaryVerdict::Inconclusive {
            reason: format!("search skipped: n = {n} exceeds limit {limit}"),
        };
    }
    let mut alpha_in = vec![0u64; n];
    let mut beta_in: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (from, to) in g.edges() {
        if from.is_alpha() {
            alpha_in[to.index - 1] |= 1 << (from.index - 1);
        } else {
            beta_in[to.index - 1].insert(from.index);
        }
    }
    let succ = g.alpha_successors();
    let hit = (1u64..(1u64 << n)).into_par_iter().find_map_first(|mask| {
        let mut a_in = 0u64;
        let mut b_in = BTreeSet::new();
        for v in 0..n {
            if mask >> v & 1 == 1 {
                a_in |= alpha_in[v];
                b_in.extend(beta_in[v].iter().copied());
            }
        }
        if a_in & !mask != 0 || b_in.len() > 1 {
            return None;
        }
        let size = mask.count_ones() as usize;
        if a_in.count_ones() as usize + b_in.len() >= size {
            return None;
        }
        if !acyclic_mask(mask, &succ) {
            return None;
        }
        let beta = b_in.into_iter().next().unwrap_or(1);
        Some((mask, beta))
    });
    match hit {
        Some((mask, beta)) => {
            let subset: BTreeSet<NodeId> = (0..n).filter(|v| mask >> v & 1 == 1).map(|v| NodeId::alpha(v + 1)).collect();
            let witness = check_acyclic_trap(g, &subset, NodeId::beta(beta)).expect("mask test and set test agree");
            NecessaryVerdict::FailsNecessary { witness }
        }
        None => NecessaryVerdict::PassesNecessary,
    }
}

fn acyclic_mask(mask: u64, succ: &[Vec<usize>]) -> bool {
    let n = succ.len();
    let mut indeg = vec![0u32; n];
    for v in (0..n).filter(|v| mask >> v & 1 == 1) {
        for &w in &succ[v] {
            if mask >> w & 1 == 1 {
                indeg[w] += 1;
            }
        }
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| mask >> v & 1 == 1 && indeg[v] == 0).collect();
    let mut removed = 0;
    while let Some(v) = stack.pop() {
        removed += 1;
        for &w in &succ[v] {
            if mask >> w & 1 == 1 {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    stack.push(w);
                }
            }
        }
    }
    removed == mask.count_ones()
}
