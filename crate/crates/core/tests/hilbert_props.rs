mod common;

use num_traits::{Signed, Zero};
use structavg::algebra::rational::{binomial, from_big, int};
use structavg::hilbert::{self, SparseHilbertSpec};

#[test]
fn hilbert_is_positive_definite() {
    for n in 1..=12 {
        let minors = hilbert::hilbert(n).leading_minors().unwrap();
        assert!(minors.iter().all(|d| d.is_positive()), "n = {n}");
    }
}

#[test]
fn inverse_entries_are_integers() {
    for n in 1..=12 {
        let inv = hilbert::hilbert_inverse(n);
        for r in 0..n {
            assert!(inv.row(r).iter().all(|x| x.is_integer()));
        }
    }
}

#[test]
fn tail_sum_identity() {
    for n in 2..=25usize {
        let n2 = int((n * n) as i64);
        for ell in 0..n {
            let direct = (ell + 1..=n).fold(int(0), |acc, k| {
                let (n, k) = (n as i64, k as i64);
                let term = from_big(binomial(n, n - k) * binomial(n + k - 1, n - 1));
                if k % 2 == 1 { acc + term } else { acc - term }
            });
            assert_eq!(direct, common::z_oracle(ell, n) / &n2, "n = {n}, ell = {ell}");
            assert_eq!(hilbert::alternating_tail_sum(ell, n), direct);
        }
    }
}

#[test]
fn block_form_agrees_with_determinant() {
    for n in 2..=7 {
        for gamma in 1..=n {
            for ells in hilbert::admissible_sequences(n, gamma) {
                let spec = SparseHilbertSpec::new(n, ells.clone()).unwrap();
                let m = hilbert::sparse_hilbert(&spec);
                assert_eq!(m, common::sparse_hilbert_oracle(n, &ells));
                if hilbert::block_form_check(&spec).is_some() {
                    assert!(!m.det().unwrap().is_zero(), "{ells:?}");
                }
            }
        }
    }
}

#[test]
fn unrecognized_but_invertible_case() {
    let spec = SparseHilbertSpec::new(6, vec![1, 2, 4, 5]).unwrap();
    assert!(hilbert::block_form_check(&spec).is_none());
    assert!(!hilbert::sparse_hilbert(&spec).det().unwrap().is_zero());
}
