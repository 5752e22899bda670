//! Constructive sufficiency: for a single-input pattern with a self-looped,
//! input-fed root that spans the state subgraph, assign monomials in `σ` along a
//! breadth-first spanning tree so that the averaged controllability matrix is
//! exactly a sparse Hilbert matrix, then decide invertibility exactly.
//!
//! Also hosts the generic averaged rank test for arbitrary polynomial pairs.

use std::collections::{BTreeSet, VecDeque};

use num_traits::Zero;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::rational::{self, Rational};
use crate::algebra::{AlgebraError, PolyMatrix, Polynomial, RationalMatrix, RationalSpan};
use crate::graph::{NodeId, SparsityPattern};
use crate::hilbert::{self, BlockDecomposition, SparseHilbertSpec};

/// Why the monomial construction does not apply.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "clause", rename_all = "kebab-case")]
pub enum RootedTreeFailure {
    #[error("requires exactly one β-node (pattern has {m})")]
    MultipleInputs { m: usize },
    #[error("no α-node carries a self-loop and an edge from the β-node")]
    NoLoopedFedRoot,
    #[error("no self-looped, input-fed root reaches every α-node (from {root}: unreached {unreached:?})")]
    NoSpanningTree {
        candidates: Vec<NodeId>,
        root: NodeId,
        unreached: BTreeSet<NodeId>,
    },
}

/// Depth classes of a breadth-first spanning tree, with α-nodes relabeled so that
/// deeper nodes get larger indices (ties by original index). All indices in this
/// struct are the new, 1-based labels unless stated otherwise.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DepthPartition {
    pub root: NodeId,
    /// `relabeling[original - 1] = new`
    pub relabeling: Vec<usize>,
    /// `(parent, child)` in new labels.
    pub tree_edges: Vec<(usize, usize)>,
    /// `depth[new - 1]`
    pub depth: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    pub max_depth: usize,
}

impl DepthPartition {
    pub fn n(&self) -> usize {
        self.depth.len()
    }

    /// Inverse of [`relabeling`](Self::relabeling): `original_of()[new - 1] = original`.
    pub fn original_of(&self) -> Vec<usize> {
        let mut inv = vec![0; self.relabeling.len()];
        for (orig, &new) in self.relabeling.iter().enumerate() {
            inv[new - 1] = orig + 1;
        }
        inv
    }

    /// Depth classes expressed with the original labels.
    pub fn classes_original(&self) -> Vec<Vec<NodeId>> {
        let inv = self.original_of();
        self.classes
            .iter()
            .map(|class| class.iter().map(|&v| NodeId::alpha(inv[v - 1])).collect())
            .collect()
    }
}

/// Finds the lowest-indexed α-node with a self-loop and an edge from the single
/// β-node from which every α-node is reachable, and returns the breadth-first
/// (minimum depth) spanning tree rooted there.
pub fn rooted_tree_partition(g: &SparsityPattern) -> Result<DepthPartition, RootedTreeFailure> {
    if g.m() != 1 {
        return Err(RootedTreeFailure::MultipleInputs { m: g.m() });
    }
    let beta = NodeId::beta(1);
    let candidates: Vec<NodeId> = g
        .alpha_nodes()
        .filter(|&v| g.has_edge(v, v) && g.has_edge(beta, v))
        .collect();
    if candidates.is_empty() {
        return Err(RootedTreeFailure::NoLoopedFedRoot);
    }
    let succ = g.alpha_successors();
    let mut first_failure = None;
    for &root in &candidates {
        let (parent, depth) = bfs_tree(&succ, root.index - 1);
        let unreached: BTreeSet<NodeId> = (0..g.n())
            .filter(|&v| depth[v] == usize::MAX)
            .map(|v| NodeId::alpha(v + 1))
            .collect();
        if unreached.is_empty() {
            return Ok(build_partition(root, &parent, &depth));
        }
        first_failure.get_or_insert((root, unreached));
    }
    let (root, unreached) = first_failure.expect("at least one candidate");
    Err(RootedTreeFailure::NoSpanningTree {
        candidates,
        root,
        unreached,
    })
}

fn bfs_tree(succ: &[Vec<usize>], root: usize) -> (Vec<usize>, Vec<usize>) {
    let n = succ.len();
    let mut parent = vec![usize::MAX; n];
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let mut next: Vec<usize> = succ[v].clone();
        next.sort_unstable();
        for w in next {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    (parent, depth)
}

fn build_partition(root: NodeId, parent: &[usize], depth: &[usize]) -> DepthPartition {
    let n = depth.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (depth[v], v));
    let mut relabeling = vec![0; n];
    for (new, &orig) in order.iter().enumerate() {
        relabeling[orig] = new + 1;
    }
    let max_depth = depth.iter().copied().max().unwrap_or(0);
    let mut classes = vec![Vec::new(); max_depth + 1];
    let mut new_depth = vec![0; n];
    for &orig in &order {
        classes[depth[orig]].push(relabeling[orig]);
        new_depth[relabeling[orig] - 1] = depth[orig];
    }
    let mut tree_edges: Vec<(usize, usize)> = (0..n)
        .filter(|&v| parent[v] != usize::MAX)
        .map(|v| (relabeling[parent[v]], relabeling[v]))
        .collect();
    tree_edges.sort_by_key(|&(p, c)| (c, p));
    DepthPartition {
        root,
        relabeling,
        tree_edges,
        depth: new_depth,
        classes,
        max_depth,
    }
}

/// `ℓ_j = 1 + Σ_{k=1}^{j-1} |V_α(k)|` for `j = 1..=p`.
pub fn ell_sequence(partition: &DepthPartition) -> Vec<usize> {
    let mut ells = Vec::with_capacity(partition.max_depth);
    let mut acc = 1;
    for j in 1..=partition.max_depth {
        ells.push(acc);
        acc += partition.classes[j].len();
    }
    ells
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("partition is for {partition} states, pattern has {pattern}")]
    SizeMismatch { partition: usize, pattern: usize },
    #[error("tree edge a{0} -> a{1} is not an edge of the pattern")]
    MissingTreeEdge(usize, usize),
    #[error("root is missing its self-loop or input edge")]
    RootNotLoopedFed,
    #[error("tree edge a{parent} -> a{child} does not increase depth by one")]
    BadDepth { parent: usize, child: usize },
}

/// Monomial pair in the relabeled coordinates: `b_1 = 1`, the root self-loop gets
/// `σ`, a tree edge `a_i -> a_j` puts `σ^{j-i+1}` in row `j`, column `i` of `A`,
/// everything else is zero.
pub fn assign_monomials(g: &SparsityPattern, partition: &DepthPartition) -> Result<(PolyMatrix, PolyMatrix), ConstructionError> {
    let n = g.n();
    if partition.n() != n {
        return Err(ConstructionError::SizeMismatch {
            partition: partition.n(),
            pattern: n,
        });
    }
    let relabeled = g.relabel_alpha(&partition.relabeling);
    let root = NodeId::alpha(1);
    if !relabeled.has_edge(root, root) || !relabeled.has_edge(NodeId::beta(1), root) {
        return Err(ConstructionError::RootNotLoopedFed);
    }
    let mut a = PolyMatrix::zeros(n, n);
    let mut b = PolyMatrix::zeros(n, g.m());
    b.set(0, 0, Polynomial::one());
    a.set(0, 0, Polynomial::sigma_pow(1));
    for &(i, j) in &partition.tree_edges {
        if !relabeled.has_edge(NodeId::alpha(i), NodeId::alpha(j)) {
            return Err(ConstructionError::MissingTreeEdge(i, j));
        }
        if partition.depth[j - 1] != partition.depth[i - 1] + 1 || j <= i {
            return Err(ConstructionError::BadDepth { parent: i, child: j });
        }
        a.set(j - 1, i - 1, Polynomial::sigma_pow((j - i + 1) as u32));
    }
    Ok((a, b))
}

/// `[B  AB  ⋯  A^{n-1}B]`.
pub fn controllability_matrix(a: &PolyMatrix, b: &PolyMatrix) -> Result<PolyMatrix, AlgebraError> {
    if a.rows() != a.cols() || b.rows() != a.rows() {
        return Err(AlgebraError::DimensionMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let mut block = b.clone();
    let mut out = b.clone();
    for _ in 1..a.rows() {
        block = a.mul(&block)?;
        out = out.hcat(&block)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateVerdict {
    AveragedControllable,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct EdgeMonomial {
    pub from: NodeId,
    pub to: NodeId,
    pub relabeled_from: NodeId,
    pub relabeled_to: NodeId,
    pub exponent: u32,
}

/// Exact constructive certificate. `a`, `b` and `averaged_matrix` live in the
/// relabeled coordinates; [`Certificate::pair_original`] maps the pair back.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub pattern_digest: String,
    pub partition: DepthPartition,
    pub ells: Vec<usize>,
    pub monomials: Vec<EdgeMonomial>,
    pub a: PolyMatrix,
    pub b: PolyMatrix,
    pub averaged_matrix: RationalMatrix,
    pub matches_sparse_hilbert: bool,
    #[serde(with = "rational::serde_p_q")]
    pub determinant: Rational,
    pub block_form: Option<BlockDecomposition>,
    pub verdict: CertificateVerdict,
}

impl Certificate {
    /// `(A, B)` in the pattern's own labels.
    pub fn pair_original(&self) -> (PolyMatrix, PolyMatrix) {
        let inv = self.partition.original_of();
        (self.a.permute(&inv, true), self.b.permute(&inv, false))
    }

    pub fn is_controllable(&self) -> bool {
        self.verdict == CertificateVerdict::AveragedControllable
    }
}

/// Runs the full monomial construction. A zero determinant yields an
/// inconclusive certificate, never a negative verdict.
pub fn monomial_certificate(g: &SparsityPattern) -> Result<Certificate, RootedTreeFailure> {
    let partition = rooted_tree_partition(g)?;
    let (a, b) = assign_monomials(g, &partition).expect("partition derived from g");
    let c = controllability_matrix(&a, &b).expect("conforming dimensions");
    let averaged_matrix = c.integrate();
    let ells = ell_sequence(&partition);
    let n = g.n();
    let (expected, block_form) = if ells.is_empty() {
        (hilbert::hilbert(n), None)
    } else {
        let spec = SparseHilbertSpec::new(n, ells.clone()).expect("depth classes give an admissible sequence");
        (hilbert::sparse_hilbert(&spec), hilbert::block_form_check(&spec))
    };
    let matches_sparse_hilbert = averaged_matrix == expected;
    let determinant = averaged_matrix.det().expect("square");
    let verdict = if matches_sparse_hilbert && !determinant.is_zero() {
        CertificateVerdict::AveragedControllable
    } else {
        CertificateVerdict::Inconclusive
    };

    let inv = partition.original_of();
    let mut monomials = vec![EdgeMonomial {
        from: partition.root,
        to: partition.root,
        relabeled_from: NodeId::alpha(1),
        relabeled_to: NodeId::alpha(1),
        exponent: 1,
    }];
    monomials.extend(partition.tree_edges.iter().map(|&(i, j)| EdgeMonomial {
        from: NodeId::alpha(inv[i - 1]),
        to: NodeId::alpha(inv[j - 1]),
        relabeled_from: NodeId::alpha(i),
        relabeled_to: NodeId::alpha(j),
        exponent: (j - i + 1) as u32,
    }));

    Ok(Certificate {
        pattern_digest: g.digest(),
        partition,
        ells,
        monomials,
        a,
        b,
        averaged_matrix,
        matches_sparse_hilbert,
        determinant,
        block_form,
        verdict,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankVerdict {
    AveragedControllable,
    InconclusiveUpToJmax,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankTrace {
    pub verdict: RankVerdict,
    /// Rank of the span of `∫A^0B, …, ∫A^jB` after each `j`.
    pub trace: Vec<usize>,
    pub j_max: usize,
}

/// Accumulates the exact column span of `∫₀¹ A^j B dσ` for `j = 0, 1, …` until it
/// reaches dimension `n` or `j` passes `j_max`.
pub fn averaged_rank_test(a: &PolyMatrix, b: &PolyMatrix, j_max: usize) -> Result<RankTrace, AlgebraError> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(AlgebraError::DimensionMismatch {
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let mut span = RationalSpan::new();
    let mut trace = Vec::new();
    let mut power = b.clone();
    for j in 0..=j_max {
        if j > 0 {
            power = a.mul(&power)?;
        }
        let integrated = power.integrate();
        for c in 0..integrated.cols() {
            span.insert(integrated.column(c));
        }
        trace.push(span.dim());
        if span.dim() == n {
            return Ok(RankTrace {
                verdict: RankVerdict::AveragedControllable,
                trace,
                j_max,
            });
        }
        if power.is_zero() {
            // every later block is zero as well
            break;
        }
    }
    Ok(RankTrace {
        verdict: RankVerdict::InconclusiveUpToJmax,
        trace,
        j_max,
    })
}

/// Random pair compliant with `g`: every edge gets `c·σ^d` with `c` a nonzero
/// integer in `[-3, 3]` and `d <= max_degree`.
pub fn random_monomial_pair<R: Rng>(g: &SparsityPattern, rng: &mut R, max_degree: u32) -> (PolyMatrix, PolyMatrix) {
    let mut a = PolyMatrix::zeros(g.n(), g.n());
    let mut b = PolyMatrix::zeros(g.n(), g.m());
    for (from, to) in g.edges() {
        let magnitude = rng.gen_range(1..=3);
        let c = if rng.gen_bool(0.5) { magnitude } else { -magnitude };
        let p = Polynomial::monomial(rational::int(c), rng.gen_range(0..=max_degree));
        if from.is_alpha() {
            a.set(to.index - 1, from.index - 1, p);
        } else {
            b.set(to.index - 1, from.index - 1, p);
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::check_compliance;
    use crate::algebra::rational::{int, rat};
    use crate::graph::fixtures::*;

    #[test]
    fn partition_fan_out() {
        let p = rooted_tree_partition(&fan_out_with_loop()).unwrap();
        assert_eq!(p.root, NodeId::alpha(1));
        assert_eq!(p.tree_edges, vec![(1, 2), (1, 3)]);
        assert_eq!(p.depth, vec![0, 1, 1]);
        assert_eq!(ell_sequence(&p), vec![1]);
    }

    #[test]
    fn partition_depth_four() {
        let p = rooted_tree_partition(&depth_four_tree()).unwrap();
        assert_eq!(p.classes, vec![vec![1], vec![2], vec![3, 4], vec![5], vec![6]]);
        assert_eq!(p.max_depth, 4);
        assert_eq!(ell_sequence(&p), vec![1, 2, 4, 5]);
    }

    #[test]
    fn partition_refusals() {
        let g = SparsityPattern::from_names(2, 2, &[("b1", "a1"), ("a1", "a1"), ("a1", "a2")]);
        assert_eq!(rooted_tree_partition(&g), Err(RootedTreeFailure::MultipleInputs { m: 2 }));
        assert_eq!(rooted_tree_partition(&path3()), Err(RootedTreeFailure::NoLoopedFedRoot));
        match rooted_tree_partition(&two_fed_six_states()) {
            Err(RootedTreeFailure::NoSpanningTree { root, unreached, .. }) => {
                assert_eq!(root, NodeId::alpha(1));
                assert!(unreached.contains(&NodeId::alpha(2)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn relabeling_orders_by_depth() {
        // a3 is the root; a1 sits at depth 2, a2 at depth 1
        let g = SparsityPattern::from_names(3, 1, &[("b1", "a3"), ("a3", "a3"), ("a3", "a2"), ("a2", "a1")]);
        let p = rooted_tree_partition(&g).unwrap();
        assert_eq!(p.relabeling, vec![3, 2, 1]);
        assert_eq!(p.classes_original(), vec![vec![NodeId::alpha(3)], vec![NodeId::alpha(2)], vec![NodeId::alpha(1)]]);
        let cert = monomial_certificate(&g).unwrap();
        let (a, b) = cert.pair_original();
        assert!(check_compliance(&a, &b, &g).is_ok());
        assert!(cert.is_controllable());
    }

    #[test]
    fn star_ell() {
        let g = SparsityPattern::from_names(4, 1, &[("b1", "a1"), ("a1", "a1"), ("a1", "a2"), ("a1", "a3"), ("a1", "a4")]);
        let p = rooted_tree_partition(&g).unwrap();
        assert_eq!(ell_sequence(&p), vec![1]);
    }

    #[test]
    fn monomials_depth_four() {
        let g = depth_four_tree();
        let p = rooted_tree_partition(&g).unwrap();
        let (a, b) = assign_monomials(&g, &p).unwrap();
        assert_eq!(b.get(0, 0), &Polynomial::one());
        let expected = [((0, 0), 1), ((1, 0), 2), ((2, 1), 2), ((3, 1), 3), ((4, 2), 3), ((5, 4), 2)];
        for ((r, c), d) in expected {
            assert_eq!(a.get(r, c), &Polynomial::sigma_pow(d));
        }
        let nonzero = (0..6).flat_map(|r| (0..6).map(move |c| (r, c))).filter(|&(r, c)| !a.get(r, c).is_zero()).count();
        assert_eq!(nonzero, 6);
    }

    #[test]
    fn single_state() {
        let g = SparsityPattern::from_names(1, 1, &[("b1", "a1"), ("a1", "a1")]);
        let cert = monomial_certificate(&g).unwrap();
        assert_eq!(cert.a.get(0, 0), &Polynomial::sigma_pow(1));
        assert_eq!(cert.b.get(0, 0), &Polynomial::one());
        assert_eq!(cert.determinant, int(1));
        assert!(cert.is_controllable());
    }

    #[test]
    fn controllability_matrix_fan_out() {
        let g = fan_out_with_loop();
        let p = rooted_tree_partition(&g).unwrap();
        let (a, b) = assign_monomials(&g, &p).unwrap();
        let c = controllability_matrix(&a, &b).unwrap();
        assert_eq!(c.get(0, 0), &Polynomial::one());
        assert!(c.get(1, 0).is_zero() && c.get(2, 0).is_zero());
        for i in 0..3u32 {
            assert_eq!(c.get(i as usize, 1), &Polynomial::sigma_pow(i + 1));
            assert_eq!(c.get(i as usize, 2), &Polynomial::sigma_pow(i + 2));
        }
        let c0 = controllability_matrix(&PolyMatrix::zeros(3, 3), &b).unwrap();
        assert_eq!(c0.get(0, 0), &Polynomial::one());
        assert!((0..3).all(|r| (1..3).all(|col| c0.get(r, col).is_zero())));
    }

    #[test]
    fn certificate_fan_out() {
        let cert = monomial_certificate(&fan_out_with_loop()).unwrap();
        assert!(cert.matches_sparse_hilbert);
        assert_eq!(cert.determinant, rat(1, 240));
        assert!(cert.is_controllable());
        assert_eq!(cert.block_form.as_ref().unwrap().sizes(), vec![3]);
    }

    #[test]
    fn rank_test_examples() {
        let g = fan_out_with_loop();
        let cert = monomial_certificate(&g).unwrap();
        let r = averaged_rank_test(&cert.a, &cert.b, 3).unwrap();
        assert_eq!(r.trace, vec![1, 2, 3]);
        assert_eq!(r.verdict, RankVerdict::AveragedControllable);

        let r = averaged_rank_test(&PolyMatrix::zeros(3, 3), &PolyMatrix::zeros(3, 1), 12).unwrap();
        assert_eq!(r.verdict, RankVerdict::InconclusiveUpToJmax);
        assert!(r.trace.iter().all(|&d| d == 0));

        let mut a = PolyMatrix::zeros(3, 3);
        a.set(1, 0, Polynomial::sigma_pow(2));
        a.set(2, 0, Polynomial::sigma_pow(3));
        let r = averaged_rank_test(&a, &cert.b, 12).unwrap();
        assert_eq!(r.verdict, RankVerdict::InconclusiveUpToJmax);
        assert_eq!(r.trace.last(), Some(&2));
        assert!(a.mul(&a).unwrap().mul(&cert.b).unwrap().is_zero());
    }
}
