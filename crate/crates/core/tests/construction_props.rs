mod common;

use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use structavg::algebra::check_compliance;
use structavg::construction::{self, RankVerdict};
use structavg::hilbert;
use structavg::necessary::{self, NecessaryVerdict};
use structavg::{NodeId, SparsityPattern};

/// Single-input pattern with a self-looped, input-fed root spanning every state,
/// plus `extra` random state edges.
fn rooted_pattern(seed: u64, n: usize, extra: usize) -> SparsityPattern {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(&mut rng);
    let root = order[0];
    let mut edges = vec![(NodeId::beta(1), NodeId::alpha(root)), (NodeId::alpha(root), NodeId::alpha(root))];
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        edges.push((NodeId::alpha(parent), NodeId::alpha(order[k])));
    }
    for _ in 0..extra {
        let e = (NodeId::alpha(rng.gen_range(1..=n)), NodeId::alpha(rng.gen_range(1..=n)));
        if !edges.contains(&e) {
            edges.push(e);
        }
    }
    SparsityPattern::new(n, 1, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn integral_is_sparse_hilbert(seed in any::<u64>(), n in 1usize..=12, extra in 0usize..6) {
        let g = rooted_pattern(seed, n, extra);
        let cert = construction::monomial_certificate(&g).unwrap();
        prop_assert!(cert.matches_sparse_hilbert);
        let ells = cert.ells.clone();
        prop_assert_eq!(&cert.averaged_matrix, &common::sparse_hilbert_oracle(n, &ells));
        // zero structure of the symbolic matrix
        let c = construction::controllability_matrix(&cert.a, &cert.b).unwrap();
        for (j, &l) in ells.iter().enumerate() {
            for r in l..n {
                prop_assert!(c.get(r, j).is_zero());
            }
        }
        let (a, b) = cert.pair_original();
        prop_assert!(check_compliance(&a, &b, &g).is_ok());
        prop_assert_eq!(cert.is_controllable(), !cert.determinant.is_zero());
    }

    #[test]
    fn certified_pairs_reach_full_rank(seed in any::<u64>(), n in 1usize..=7, extra in 0usize..4) {
        let g = rooted_pattern(seed, n, extra);
        let cert = construction::monomial_certificate(&g).unwrap();
        prop_assume!(!cert.determinant.is_zero());
        let r = construction::averaged_rank_test(&cert.a, &cert.b, 4 * n).unwrap();
        prop_assert_eq!(r.verdict, RankVerdict::AveragedControllable);
        prop_assert!(r.trace.len() <= n);
    }

    #[test]
    fn unreachable_rows_vanish(seed in any::<u64>(), n in 2usize..=6, m in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_dag_pattern(&mut rng, n, m, 0.4);
        if let NecessaryVerdict::FailsNecessary { witness } = necessary::counting_test(&g) {
            let (a, b) = construction::random_monomial_pair(&g, &mut rng, 5);
            let mut power = b.clone();
            for l in 0..=3 * n {
                if l > 0 {
                    power = a.mul(&power).unwrap();
                }
                if l >= witness.k {
                    for v in &witness.unreachable {
                        prop_assert!((0..m).all(|c| power.get(v.index - 1, c).is_zero()));
                    }
                }
            }
        }
    }
}

#[test]
fn star_gives_single_truncation() {
    for n in 2..=10 {
        let mut edges = vec![("b1".to_string(), "a1".to_string()), ("a1".to_string(), "a1".to_string())];
        edges.extend((2..=n).map(|j| ("a1".to_string(), format!("a{j}"))));
        let names: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let g = SparsityPattern::from_names(n, 1, &names);
        let cert = construction::monomial_certificate(&g).unwrap();
        assert_eq!(cert.ells, vec![1]);
        let report = hilbert::verify_single_truncation(n).unwrap();
        assert!(report.records[0].nonsingular && cert.is_controllable());
        assert_eq!(cert.determinant, report.records[0].det);
    }
}

#[test]
fn trap_hits_never_reach_full_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7a4b);
    let mut hits = 0;
    for attempt in 0..400 {
        let n = 2 + attempt % 5;
        let g = common::random_pattern(&mut rng, n, 1, 0.3);
        if !necessary::acyclic_trap_search(&g, 12).fails() {
            continue;
        }
        hits += 1;
        for _ in 0..50 {
            let (a, b) = construction::random_monomial_pair(&g, &mut rng, 3);
            let r = construction::averaged_rank_test(&a, &b, 4 * n).unwrap();
            assert_eq!(r.verdict, RankVerdict::InconclusiveUpToJmax, "{}", g.to_json());
        }
        if hits == 20 {
            break;
        }
    }
    assert!(hits >= 10, "only {hits} trap hits generated");
}
