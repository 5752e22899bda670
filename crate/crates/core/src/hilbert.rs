//! Hilbert matrices, their explicit inverses, and the sparse variants
//! `H_n(ℓ_1, …, ℓ_γ)` obtained by zeroing column `i` below row `ℓ_i`.
//!
//! Besides constructing the matrices, this module checks the determinant theory
//! for the single-truncation case (`γ = 1`) through the signed quantity
//! `Z(ℓ, n)`, recognizes block upper-triangular instances whose invertibility is
//! guaranteed, and enumerates admissible truncation sequences looking for a
//! singular instance.

use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::rational::{self, binomial, from_big, Rational};
use crate::algebra::RationalMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HilbertError {
    #[error("n must be at least {min} (got {n})")]
    DimensionTooSmall { n: usize, min: usize },
    #[error("sequence length {gamma} outside [1, {n}]")]
    GammaOutOfRange { gamma: usize, n: usize },
    #[error("sequence is not non-decreasing at position {position}")]
    NonMonotone { position: usize },
    #[error("ℓ_{position} = {value} violates {position} <= ℓ_{position} < {n}")]
    EllOutOfRange { position: usize, value: usize, n: usize },
    #[error("index ({i}, {j}) outside 1..={n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("ℓ = {ell} outside [0, {max}]")]
    ZRange { ell: usize, max: usize },
    #[error("full enumeration refused: n = {n} exceeds limit {limit}")]
    LimitExceeded { n: usize, limit: usize },
}

/// `(H_n)_{ij} = 1/(i + j - 1)`.
pub fn hilbert(n: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n, n, |i, j| rational::rat(1, (i + j + 1) as i64))
}

/// Closed-form entry `(i, j)` (1-based) of `H_n⁻¹`.
pub fn hilbert_inverse_entry(n: usize, i: usize, j: usize) -> Result<Rational, HilbertError> {
    if i == 0 || j == 0 || i > n || j > n {
        return Err(HilbertError::IndexOutOfRange { i, j, n });
    }
    let (n, i, j) = (n as i64, i as i64, j as i64);
    let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
    let c = binomial(i + j - 2, i - 1);
    let value = BigInt::from(sign * (i + j - 1)) * binomial(n + i - 1, n - j) * binomial(n + j - 1, n - i) * &c * &c;
    Ok(from_big(value))
}

pub fn hilbert_inverse(n: usize) -> RationalMatrix {
    RationalMatrix::from_fn(n, n, |i, j| hilbert_inverse_entry(n, i + 1, j + 1).expect("indices in range"))
}

/// Dimension plus a non-decreasing truncation sequence with `i <= ℓ_i < n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparseHilbertSpec {
    n: usize,
    ells: Vec<usize>,
}

impl SparseHilbertSpec {
    pub fn new(n: usize, ells: Vec<usize>) -> Result<Self, HilbertError> {
        if n < 2 {
            return Err(HilbertError::DimensionTooSmall { n, min: 2 });
        }
        if ells.is_empty() || ells.len() > n {
            return Err(HilbertError::GammaOutOfRange { gamma: ells.len(), n });
        }
        for (k, &value) in ells.iter().enumerate() {
            let position = k + 1;
            if k > 0 && value < ells[k - 1] {
                return Err(HilbertError::NonMonotone { position });
            }
            if value < position || value >= n {
                return Err(HilbertError::EllOutOfRange { position, value, n });
            }
        }
        Ok(SparseHilbertSpec { n, ells })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ells(&self) -> &[usize] {
        &self.ells
    }

    pub fn gamma(&self) -> usize {
        self.ells.len()
    }

    /// Last nonzero row of column `c` (1-based); `n` for untruncated columns.
    fn column_extent(&self, c: usize) -> usize {
        self.ells.get(c - 1).copied().unwrap_or(self.n)
    }
}

/// Entry `(r, c)` is `1/(r + c - 1)` if `c > γ` or `r <= ℓ_c`, else zero.
pub fn sparse_hilbert(spec: &SparseHilbertSpec) -> RationalMatrix {
    RationalMatrix::from_fn(spec.n, spec.n, |r, c| {
        if r < spec.column_extent(c + 1) {
            rational::rat(1, (r + c + 1) as i64)
        } else {
            Rational::zero()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZMethod {
    ClosedForm,
    Recurrence,
}

/// `Z(ℓ, n) = (-1)^ℓ (ℓ+1)² C(n, n-ℓ-1) C(n+ℓ, n-1)`, or the same value via
/// `Z(0, n) = n²`, `Z(ℓ, n) = -(n²/ℓ² - 1) Z(ℓ-1, n)`.
pub fn z_value(ell: usize, n: usize, method: ZMethod) -> Result<Rational, HilbertError> {
    if n < 2 {
        return Err(HilbertError::DimensionTooSmall { n, min: 2 });
    }
    if ell > n - 1 {
        return Err(HilbertError::ZRange { ell, max: n - 1 });
    }
    Ok(match method {
        ZMethod::ClosedForm => z_closed(ell, n),
        ZMethod::Recurrence => z_recurrence(n).swap_remove(ell),
    })
}

fn z_closed(ell: usize, n: usize) -> Rational {
    let (l, n) = (ell as i64, n as i64);
    let sign = if l % 2 == 0 { 1 } else { -1 };
    from_big(BigInt::from(sign * (l + 1) * (l + 1)) * binomial(n, n - l - 1) * binomial(n + l, n - 1))
}

/// `Z(0, n), …, Z(n-1, n)` by the recurrence.
fn z_recurrence(n: usize) -> Vec<Rational> {
    let n2 = rational::int((n * n) as i64);
    let mut out = vec![n2.clone()];
    for l in 1..n {
        let l2 = rational::int((l * l) as i64);
        let factor = -(&n2 / &l2 - rational::int(1));
        let next = factor * out.last().unwrap();
        out.push(next);
    }
    out
}

/// `Σ_{k=ℓ+1}^{n} (-1)^{k+1} C(n, n-k) C(n+k-1, n-1)`.
pub fn alternating_tail_sum(ell: usize, n: usize) -> Rational {
    let n = n as i64;
    let mut acc = BigInt::zero();
    for k in ell as i64 + 1..=n {
        let term = binomial(n, n - k) * binomial(n + k - 1, n - 1);
        if k % 2 == 1 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    from_big(acc)
}

/// `⌊n/√2⌋`: the largest `ℓ` with `2ℓ² <= n²`, in integer arithmetic.
pub fn floor_n_over_sqrt2(n: usize) -> usize {
    let n2 = (n as u128) * (n as u128);
    let mut lo = 0u128;
    let mut hi = n as u128;
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if 2 * mid * mid <= n2 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationRecord {
    pub ell: usize,
    #[serde(with = "rational::serde_p_q")]
    pub det: Rational,
    #[serde(with = "rational::serde_p_q")]
    pub z: Rational,
    pub nonsingular: bool,
    pub determinant_lemma_holds: bool,
    pub closed_form_matches_recurrence: bool,
    pub tail_sum_matches_z: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingleTruncationReport {
    pub n: usize,
    #[serde(with = "rational::serde_p_q")]
    pub hilbert_det: Rational,
    pub peak: usize,
    pub records: Vec<TruncationRecord>,
    pub unimodal: bool,
    pub argmin_is_one: bool,
    pub violations: Vec<String>,
}

impl SingleTruncationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks, for every `ℓ ∈ [1, n-1]`, that `H_n(ℓ)` is nonsingular, that
/// `det H_n(ℓ) = (1 - Z(ℓ,n)/n²) det H_n`, that both ways of computing `Z` agree,
/// and that `|Z(·, n)|` rises up to `⌊n/√2⌋`, falls afterwards and is smallest at 1.
pub fn verify_single_truncation(n: usize) -> Result<SingleTruncationReport, HilbertError> {
    if n < 2 {
        return Err(HilbertError::DimensionTooSmall { n, min: 2 });
    }
    let hilbert_det = hilbert(n).det().expect("square");
    let n2 = rational::int((n * n) as i64);
    let recurrence = z_recurrence(n);
    let mut violations = Vec::new();

    if recurrence[0] != n2 {
        violations.push(format!("n={n}: Z(0,n) != n²"));
    }

    let records: Vec<TruncationRecord> = (1..n)
        .into_par_iter()
        .map(|ell| {
            let spec = SparseHilbertSpec::new(n, vec![ell]).expect("1 <= ell < n");
            let det = sparse_hilbert(&spec).det().expect("square");
            let z = z_closed(ell, n);
            let lemma = (rational::int(1) - &z / &n2) * &hilbert_det;
            TruncationRecord {
                ell,
                nonsingular: !det.is_zero(),
                determinant_lemma_holds: lemma == det,
                closed_form_matches_recurrence: z == recurrence[ell],
                tail_sum_matches_z: alternating_tail_sum(ell, n) == &z / &n2,
                det,
                z,
            }
        })
        .collect();

    for r in &records {
        let ell = r.ell;
        if !r.nonsingular {
            violations.push(format!("n={n}, ℓ={ell}: H_n(ℓ) is singular"));
        }
        if !r.determinant_lemma_holds {
            violations.push(format!("n={n}, ℓ={ell}: determinant lemma identity fails"));
        }
        if !r.closed_form_matches_recurrence {
            violations.push(format!("n={n}, ℓ={ell}: closed form and recurrence disagree"));
        }
        if !r.tail_sum_matches_z {
            violations.push(format!("n={n}, ℓ={ell}: alternating tail sum != Z/n²"));
        }
        if alternating_tail_sum(ell, n) == rational::int(1) {
            violations.push(format!("n={n}, ℓ={ell}: alternating tail sum equals 1"));
        }
    }

    let peak = floor_n_over_sqrt2(n);
    let abs_z: Vec<Rational> = records.iter().map(|r| r.z.abs()).collect();
    // abs_z[k] = |Z(k+1, n)|
    let mut unimodal = true;
    for ell in 2..n {
        let (prev, cur) = (&abs_z[ell - 2], &abs_z[ell - 1]);
        let ok = if ell <= peak { cur > prev } else { cur < prev };
        if !ok {
            unimodal = false;
            violations.push(format!("n={n}: |Z| not monotone at ℓ={ell} (peak {peak})"));
        }
    }
    let min = abs_z.iter().min().expect("n >= 2");
    let argmin_is_one = &abs_z[0] == min && abs_z.iter().skip(1).all(|z| z > min);
    if !argmin_is_one {
        violations.push(format!("n={n}: argmin |Z| is not ℓ=1"));
    }
    if n >= 3 && abs_z[0] >= abs_z[n - 2] {
        violations.push(format!("n={n}: |Z(1,n)| >= |Z(n-1,n)|"));
    }
    let n = n as i64;
    if abs_z[0] != rational::int(n.pow(4) - n * n) {
        violations.push(format!("n={n}: |Z(1,n)| != n⁴ - n²"));
    }
    if abs_z[abs_z.len() - 1] != from_big(BigInt::from(n * n) * binomial(2 * n - 1, n - 1)) {
        violations.push(format!("n={n}: |Z(n-1,n)| != n² C(2n-1, n-1)"));
    }

    Ok(SingleTruncationReport {
        n: n as usize,
        hilbert_det,
        peak,
        records,
        unimodal,
        argmin_is_one,
        violations,
    })
}

/// All non-decreasing `(ℓ_1, …, ℓ_γ)` with `i <= ℓ_i < n`, in lexicographic order.
pub fn admissible_sequences(n: usize, gamma: usize) -> Vec<Vec<usize>> {
    fn extend(n: usize, gamma: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == gamma {
            out.push(cur.clone());
            return;
        }
        let position = cur.len() + 1;
        let lo = cur.last().copied().unwrap_or(1).max(position);
        for v in lo..n {
            cur.push(v);
            extend(n, gamma, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if gamma >= 1 && n >= 2 {
        extend(n, gamma, &mut Vec::with_capacity(gamma), &mut out);
    }
    out
}

/// One JSON-lines record of a scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub n: usize,
    pub ells: Vec<usize>,
    #[serde(with = "rational::serde_p_q")]
    pub det: Rational,
    pub singular: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Extremum {
    pub ells: Vec<usize>,
    #[serde(with = "rational::serde_p_q")]
    pub abs_det: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub n: usize,
    /// `(γ, number of sequences)`
    pub counts: Vec<(usize, usize)>,
    pub total: usize,
    pub block_form_recognized: usize,
    pub singular: Vec<Vec<usize>>,
    pub min_abs_det: Option<Extremum>,
    pub max_abs_det: Option<Extremum>,
    #[serde(skip)]
    pub records: Vec<ScanRecord>,
}

pub const DEFAULT_SCAN_LIMIT: usize = 8;

/// Exact determinant of every admissible `H_n(ℓ_1, …, ℓ_γ)` for `γ` in range.
/// Records come back sorted by `(γ, sequence)`.
pub fn conjecture_scan(n: usize, gammas: RangeInclusive<usize>, limit: usize) -> Result<ScanReport, HilbertError> {
    if n < 2 {
        return Err(HilbertError::DimensionTooSmall { n, min: 2 });
    }
    if n > limit {
        return Err(HilbertError::LimitExceeded { n, limit });
    }
    let mut counts = Vec::new();
    let mut jobs = Vec::new();
    for gamma in gammas {
        if gamma == 0 || gamma > n {
            return Err(HilbertError::GammaOutOfRange { gamma, n });
        }
        let seqs = admissible_sequences(n, gamma);
        counts.push((gamma, seqs.len()));
        jobs.extend(seqs);
    }
    let evaluated: Vec<(ScanRecord, bool)> = jobs
        .into_par_iter()
        .map(|ells| {
            let spec = SparseHilbertSpec::new(n, ells.clone()).expect("admissible by construction");
            let det = sparse_hilbert(&spec).det().expect("square");
            let recognized = block_form_check(&spec).is_some();
            (
                ScanRecord {
                    n,
                    ells,
                    singular: det.is_zero(),
                    det,
                },
                recognized,
            )
        })
        .collect();

    let mut min_abs_det: Option<Extremum> = None;
    let mut max_abs_det: Option<Extremum> = None;
    let mut singular = Vec::new();
    let mut records = Vec::with_capacity(evaluated.len());
    let mut block_form_recognized = 0;
    for (rec, recognized) in evaluated {
        block_form_recognized += recognized as usize;
        let abs = rec.det.abs();
        if rec.singular {
            singular.push(rec.ells.clone());
        }
        if min_abs_det.as_ref().is_none_or(|m| abs < m.abs_det) {
            min_abs_det = Some(Extremum {
                ells: rec.ells.clone(),
                abs_det: abs.clone(),
            });
        }
        if max_abs_det.as_ref().is_none_or(|m| abs > m.abs_det) {
            max_abs_det = Some(Extremum {
                ells: rec.ells.clone(),
                abs_det: abs,
            });
        }
        records.push(rec);
    }
    Ok(ScanReport {
        n,
        total: records.len(),
        counts,
        block_form_recognized,
        singular,
        min_abs_det,
        max_abs_det,
        records,
    })
}

/// A diagonal block: rows/columns `start..start + size` (1-based start); inside it
/// only the first column is truncated, keeping its first `kept` entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiagonalBlock {
    pub start: usize,
    pub size: usize,
    pub kept: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub blocks: Vec<DiagonalBlock>,
}

impl BlockDecomposition {
    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.size).collect()
    }

    pub fn kept(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.kept).collect()
    }
}

/// Recognizes `H_n(ℓ…)` as block upper triangular with zero blocks below the
/// diagonal and each diagonal block a principal submatrix of `H_n` whose first
/// column alone is truncated. Such matrices are invertible. Among valid
/// decompositions the one with the fewest blocks is returned (ties: larger
/// leading blocks). `None` means the recognizer does not apply, not that the
/// matrix is singular.
pub fn block_form_check(spec: &SparseHilbertSpec) -> Option<BlockDecomposition> {
    let n = spec.n;
    let fits = |start: usize, end: usize| -> Option<usize> {
        let first = spec.column_extent(start);
        if first > end {
            return None;
        }
        if (start + 1..=end).any(|c| spec.column_extent(c) != end) {
            return None;
        }
        Some((first - start + 1).min(end - start + 1))
    };
    // best[s] = (block count, chosen end) covering columns s..=n
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n + 2];
    best[n + 1] = Some((0, n + 1));
    for start in (1..=n).rev() {
        for end in (start..=n).rev() {
            if fits(start, end).is_none() {
                continue;
            }
            if let Some((count, _)) = best[end + 1] {
                let candidate = (count + 1, end);
                if best[start].is_none_or(|(c, _)| candidate.0 < c) {
                    best[start] = Some(candidate);
                }
            }
        }
    }
    best[1]?;
    let mut blocks = Vec::new();
    let mut start = 1;
    while start <= n {
        let (_, end) = best[start].expect("reconstructable");
        blocks.push(DiagonalBlock {
            start,
            size: end - start + 1,
            kept: fits(start, end).expect("validated"),
        });
        start = end + 1;
    }
    Some(BlockDecomposition { blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rational::{int, rat};

    #[test]
    fn hilbert_small() {
        assert_eq!(hilbert(1), RationalMatrix::identity(1));
        assert_eq!(
            hilbert(2),
            RationalMatrix::from_rows(vec![vec![int(1), rat(1, 2)], vec![rat(1, 2), rat(1, 3)]]).unwrap()
        );
    }

    #[test]
    fn inverse_entries() {
        assert_eq!(hilbert_inverse_entry(2, 1, 1).unwrap(), int(4));
        assert_eq!(hilbert_inverse_entry(2, 1, 2).unwrap(), int(-6));
        assert_eq!(hilbert_inverse_entry(2, 2, 2).unwrap(), int(12));
        assert!(hilbert_inverse_entry(2, 3, 1).is_err());
        for n in 1..=6 {
            assert_eq!(hilbert_inverse(n).mul(&hilbert(n)).unwrap(), RationalMatrix::identity(n));
        }
    }

    #[test]
    fn spec_validation() {
        assert!(SparseHilbertSpec::new(5, vec![2, 2, 3]).is_ok());
        assert_eq!(SparseHilbertSpec::new(1, vec![1]), Err(HilbertError::DimensionTooSmall { n: 1, min: 2 }));
        assert_eq!(SparseHilbertSpec::new(5, vec![3, 2]), Err(HilbertError::NonMonotone { position: 2 }));
        assert!(matches!(SparseHilbertSpec::new(5, vec![1, 1]), Err(HilbertError::EllOutOfRange { position: 2, .. })));
        assert!(matches!(SparseHilbertSpec::new(5, vec![5]), Err(HilbertError::EllOutOfRange { .. })));
        assert!(matches!(SparseHilbertSpec::new(5, vec![]), Err(HilbertError::GammaOutOfRange { .. })));
    }

    #[test]
    fn sparse_single_truncation() {
        let m = sparse_hilbert(&SparseHilbertSpec::new(3, vec![1]).unwrap());
        let expected = RationalMatrix::from_rows(vec![
            vec![int(1), rat(1, 2), rat(1, 3)],
            vec![int(0), rat(1, 3), rat(1, 4)],
            vec![int(0), rat(1, 4), rat(1, 5)],
        ])
        .unwrap();
        assert_eq!(m, expected);
    }

    #[test]
    fn z_examples() {
        assert_eq!(z_value(0, 5, ZMethod::ClosedForm).unwrap(), int(25));
        assert_eq!(z_value(0, 5, ZMethod::Recurrence).unwrap(), int(25));
        assert_eq!(z_value(1, 3, ZMethod::ClosedForm).unwrap(), int(-72));
        assert_eq!(z_value(1, 3, ZMethod::Recurrence).unwrap(), int(-72));
        assert_eq!(z_value(2, 3, ZMethod::ClosedForm).unwrap(), int(90));
        assert!(z_value(3, 3, ZMethod::ClosedForm).is_err());
    }

    #[test]
    fn sqrt2_floor() {
        let expected = [(2, 1), (3, 2), (4, 2), (5, 3), (7, 4), (10, 7), (25, 17)];
        for (n, l) in expected {
            assert_eq!(floor_n_over_sqrt2(n), l, "n = {n}");
        }
    }

    #[test]
    fn single_truncation_n2() {
        let report = verify_single_truncation(2).unwrap();
        assert!(report.passed(), "{:?}", report.violations);
        assert_eq!(report.records[0].det, rat(1, 3));
        assert_eq!(report.hilbert_det, rat(1, 12));
        assert_eq!(verify_single_truncation(5).unwrap().peak, 3);
    }

    #[test]
    fn sequences() {
        assert_eq!(admissible_sequences(3, 1), vec![vec![1], vec![2]]);
        assert_eq!(admissible_sequences(4, 2), vec![vec![1, 2], vec![1, 3], vec![2, 2], vec![2, 3], vec![3, 3]]);
        assert!(admissible_sequences(3, 3).is_empty());
    }

    #[test]
    fn scan_small() {
        let report = conjecture_scan(3, 1..=1, DEFAULT_SCAN_LIMIT).unwrap();
        assert_eq!(report.total, 2);
        assert!(report.singular.is_empty());
        assert!(conjecture_scan(9, 1..=1, DEFAULT_SCAN_LIMIT).is_err());
        let json = serde_json::to_string(&report.records[0]).unwrap();
        assert_eq!(json, format!(r#"{{"n":3,"ells":[1],"det":"{}","singular":false}}"#, rational::to_string(&report.records[0].det)));
    }

    #[test]
    fn block_forms() {
        let spec = SparseHilbertSpec::new(5, vec![2, 2, 3]).unwrap();
        let blocks = block_form_check(&spec).unwrap();
        assert_eq!(blocks.sizes(), vec![2, 3]);
        assert_eq!(blocks.kept(), vec![2, 1]);

        let spec = SparseHilbertSpec::new(3, vec![1]).unwrap();
        let blocks = block_form_check(&spec).unwrap();
        assert_eq!(blocks.sizes(), vec![3]);
        assert_eq!(blocks.kept(), vec![1]);

        let spec = SparseHilbertSpec::new(6, vec![1, 2, 4, 5]).unwrap();
        assert!(block_form_check(&spec).is_none());
        assert!(!sparse_hilbert(&spec).det().unwrap().is_zero());
    }
}
