#![allow(dead_code)]

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::Rng;
use structavg::algebra::rational::{binomial, from_big, int, Rational};
use structavg::algebra::RationalMatrix;
use structavg::{NodeId, SparsityPattern};

/// Every α- and β-to-α edge independently with probability `p`.
pub fn random_pattern<R: Rng>(rng: &mut R, n: usize, m: usize, p: f64) -> SparsityPattern {
    let mut edges = Vec::new();
    for to in 1..=n {
        for from in 1..=n {
            if rng.gen_bool(p) {
                edges.push((NodeId::alpha(from), NodeId::alpha(to)));
            }
        }
        for from in 1..=m {
            if rng.gen_bool(p) {
                edges.push((NodeId::beta(from), NodeId::alpha(to)));
            }
        }
    }
    SparsityPattern::new(n, m, edges).expect("valid by construction")
}

/// Determinant by textbook Gaussian elimination over the rationals.
pub fn det_gauss(m: &RationalMatrix) -> Rational {
    let n = m.rows();
    let mut a: Vec<Vec<Rational>> = (0..n).map(|r| m.row(r).to_vec()).collect();
    let mut det = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !a[r][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= a[c][c].clone();
        for r in c + 1..n {
            if a[r][c].is_zero() {
                continue;
            }
            let f = &a[r][c] / &a[c][c];
            for k in c..n {
                let v = &f * &a[c][k];
                a[r][k] -= v;
            }
        }
    }
    det
}

/// `H_n` with column `j` zeroed below row `ells[j-1]`.
pub fn sparse_hilbert_oracle(n: usize, ells: &[usize]) -> RationalMatrix {
    RationalMatrix::from_fn(n, n, |r, c| {
        if c < ells.len() && r + 1 > ells[c] {
            Rational::zero()
        } else {
            Rational::new(1.into(), ((r + c + 1) as i64).into())
        }
    })
}

/// `(-1)^ℓ (ℓ+1)² C(n, n-ℓ-1) C(n+ℓ, n-1)`
pub fn z_oracle(ell: usize, n: usize) -> Rational {
    let (l, n) = (ell as i64, n as i64);
    let v = from_big(binomial(n, n - l - 1) * binomial(n + l, n - 1)) * int((l + 1) * (l + 1));
    if ell % 2 == 1 {
        -v
    } else {
        v
    }
}

/// α-nodes with no walk from a β-node of length in `k+1 ..= k+n`; a longer walk
/// can always be shortened into that window by cutting out a cycle.
pub fn unreachable_oracle(g: &SparsityPattern, k: usize) -> BTreeSet<NodeId> {
    let n = g.n();
    let mut cur: Vec<bool> = (1..=n)
        .map(|j| g.beta_nodes().any(|b| g.has_edge(b, NodeId::alpha(j))))
        .collect();
    let mut hit = vec![false; n];
    for len in 1..=k + n {
        if len > k {
            for v in 0..n {
                hit[v] |= cur[v];
            }
        }
        cur = (1..=n)
            .map(|j| (1..=n).any(|i| cur[i - 1] && g.has_edge(NodeId::alpha(i), NodeId::alpha(j))))
            .collect();
    }
    (1..=n).filter(|&v| !hit[v - 1]).map(NodeId::alpha).collect()
}

/// Exhaustive search for a permutation `π` with `a_i -> a_π(i)` an edge for all `i`.
pub fn has_cycle_cover_oracle(g: &SparsityPattern) -> bool {
    fn extend(g: &SparsityPattern, i: usize, used: &mut Vec<bool>) -> bool {
        let n = g.n();
        if i > n {
            return true;
        }
        for j in 1..=n {
            if !used[j - 1] && g.has_edge(NodeId::alpha(i), NodeId::alpha(j)) {
                used[j - 1] = true;
                if extend(g, i + 1, used) {
                    return true;
                }
                used[j - 1] = false;
            }
        }
        false
    }
    extend(g, 1, &mut vec![false; g.n()])
}

/// State edges only from lower to higher index (no cycles), every state fed by an
/// earlier state or an input so the pattern is accessible.
pub fn random_dag_pattern<R: Rng>(rng: &mut R, n: usize, m: usize, p: f64) -> SparsityPattern {
    let mut edges = Vec::new();
    for to in 1..=n {
        let mut fed = false;
        for from in 1..to {
            if rng.gen_bool(p) {
                edges.push((NodeId::alpha(from), NodeId::alpha(to)));
                fed = true;
            }
        }
        for from in 1..=m {
            if rng.gen_bool(p / 2.0) {
                edges.push((NodeId::beta(from), NodeId::alpha(to)));
                fed = true;
            }
        }
        if !fed {
            let from = rng.gen_range(0..to - 1 + m);
            let src = if from < to - 1 { NodeId::alpha(from + 1) } else { NodeId::beta(from - (to - 1) + 1) };
            edges.push((src, NodeId::alpha(to)));
        }
    }
    SparsityPattern::new(n, m, edges).expect("valid by construction")
}
