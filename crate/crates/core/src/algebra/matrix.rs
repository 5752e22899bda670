use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::poly::Polynomial;
use super::rational::{self, Rational};
use crate::graph::{NodeId, SparsityPattern};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("dimension mismatch: {left_rows}x{left_cols} times {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("ragged or empty matrix literal")]
    Ragged,
}

/// Dense matrix of polynomials in `σ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            entries: vec![Polynomial::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = PolyMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Polynomial::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Polynomial>>) -> Result<Self, AlgebraError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(AlgebraError::Ragged);
        }
        Ok(PolyMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// 0-based access.
    pub fn get(&self, r: usize, c: usize) -> &Polynomial {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Polynomial) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Polynomial::is_zero)
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix, AlgebraError> {
        if self.cols != rhs.rows {
            return Err(AlgebraError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = PolyMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * out.cols + j;
                    out.entries[idx] = &out.entries[idx] + &(a * b);
                }
            }
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self rhs]`.
    pub fn hcat(&self, rhs: &PolyMatrix) -> Result<PolyMatrix, AlgebraError> {
        if self.rows != rhs.rows {
            return Err(AlgebraError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = PolyMatrix::zeros(self.rows, self.cols + rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..rhs.cols {
                out.set(i, self.cols + j, rhs.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Entrywise `∫₀¹ · dσ`.
    pub fn integrate(&self) -> RationalMatrix {
        RationalMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(Polynomial::integrate_unit).collect(),
        }
    }

    pub fn eval_f64(&self, sigma: f64) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).eval_f64(sigma))
    }

    /// Simultaneous row and column permutation: entry `(i, j)` moves to
    /// `(perm[i] - 1, perm[j] - 1)` for square matrices, rows only otherwise.
    pub fn permute(&self, perm: &[usize], permute_cols: bool) -> PolyMatrix {
        let mut out = PolyMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let c = if permute_cols { perm[j] - 1 } else { j };
                out.set(perm[i] - 1, c, self.get(i, j).clone());
            }
        }
        out
    }
}

impl Serialize for PolyMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<&[Polynomial]> = self.entries.chunks(self.cols).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolyMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<Polynomial>>::deserialize(d)?;
        PolyMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplianceViolation {
    pub matrix: char,
    pub row: usize,
    pub col: usize,
    pub missing_edge: (NodeId, NodeId),
}

impl fmt::Display for ComplianceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{},{}] is nonzero but {} -> {} is not an edge",
            self.matrix, self.row, self.col, self.missing_edge.0, self.missing_edge.1
        )
    }
}

/// Entry `(j, i)` of `A` nonzero requires `a_i -> a_j`; entry `(j, i)` of `B`
/// nonzero requires `b_i -> a_j` (1-based in the returned violation).
pub fn check_compliance(a: &PolyMatrix, b: &PolyMatrix, g: &SparsityPattern) -> Result<(), ComplianceViolation> {
    assert_eq!((a.rows(), a.cols()), (g.n(), g.n()), "A must be n x n");
    assert_eq!((b.rows(), b.cols()), (g.n(), g.m()), "B must be n x m");
    for j in 0..g.n() {
        for i in 0..g.n() {
            let edge = (NodeId::alpha(i + 1), NodeId::alpha(j + 1));
            if !a.get(j, i).is_zero() && !g.has_edge(edge.0, edge.1) {
                return Err(ComplianceViolation {
                    matrix: 'A',
                    row: j + 1,
                    col: i + 1,
                    missing_edge: edge,
                });
            }
        }
        for i in 0..g.m() {
            let edge = (NodeId::beta(i + 1), NodeId::alpha(j + 1));
            if !b.get(j, i).is_zero() && !g.has_edge(edge.0, edge.1) {
                return Err(ComplianceViolation {
                    matrix: 'B',
                    row: j + 1,
                    col: i + 1,
                    missing_edge: edge,
                });
            }
        }
    }
    Ok(())
}

/// Dense matrix of exact rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    /// `f` receives 0-based indices.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        RationalMatrix { rows, cols, entries }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, AlgebraError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(AlgebraError::Ragged);
        }
        Ok(RationalMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Rational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn mul(&self, rhs: &RationalMatrix) -> Result<RationalMatrix, AlgebraError> {
        if self.cols != rhs.rows {
            return Err(AlgebraError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        Ok(RationalMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols)
                .filter(|&k| !self.get(i, k).is_zero() && !rhs.get(k, j).is_zero())
                .map(|k| self.get(i, k) * rhs.get(k, j))
                .fold(Rational::zero(), |acc, x| acc + x)
        }))
    }

    pub fn transpose(&self) -> RationalMatrix {
        RationalMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Submatrix of rows `r0..r1` and columns `c0..c1` (half-open, 0-based).
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> RationalMatrix {
        RationalMatrix::from_fn(r1 - r0, c1 - c0, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    /// Rows scaled to integers by the lcm of their denominators, plus the product
    /// of the scale factors.
    fn integer_rows(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        let mut scale_product = BigInt::one();
        let rows = (0..self.rows)
            .map(|r| {
                let row = self.row(r);
                let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
                scale_product *= &lcm;
                row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
            })
            .collect();
        (rows, scale_product)
    }

    /// Exact rank by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let (mut rows, _) = self.integer_rows();
        bareiss(&mut rows, self.cols).rank
    }

    /// Exact determinant (Bareiss on integer-scaled rows).
    pub fn det(&self) -> Result<Rational, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        if self.rows == 0 {
            return Ok(Rational::one());
        }
        let (mut rows, scale) = self.integer_rows();
        let result = bareiss(&mut rows, self.cols);
        if result.rank < self.rows {
            return Ok(Rational::zero());
        }
        let mut det = rows[self.rows - 1][self.cols - 1].clone();
        if result.swaps % 2 == 1 {
            det = -det;
        }
        Ok(Rational::new(det, scale))
    }

    /// Leading principal minors `det(M[..k, ..k])` for `k = 1..=n`.
    pub fn leading_minors(&self) -> Result<Vec<Rational>, AlgebraError> {
        if !self.is_square() {
            return Err(AlgebraError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        (1..=self.rows).map(|k| self.block(0, k, 0, k).det()).collect()
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |r, c| rational::to_f64(self.get(r, c)))
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self
                .row(r)
                .iter()
                .map(|x| if x.denom().is_one() { x.numer().to_string() } else { x.to_string() })
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for RationalMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.rows)
            .map(|r| self.row(r).iter().map(rational::to_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        let rows = raw
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|s| rational::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("bad rational {s:?}"))))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        RationalMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

struct Elimination {
    rank: usize,
    swaps: usize,
}

/// In-place fraction-free (Bareiss) row echelon form over the integers. Columns
/// without a pivot are skipped; every division is exact. For a nonsingular square
/// input the last diagonal entry equals the determinant up to the swap sign.
fn bareiss(a: &mut [Vec<BigInt>], cols: usize) -> Elimination {
    let rows = a.len();
    let mut prev = BigInt::one();
    let mut rank = 0;
    let mut swaps = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        if p != rank {
            a.swap(p, rank);
            swaps += 1;
        }
        let (top, bottom) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = pivot_row[c].clone();
        for row in bottom.iter_mut() {
            let factor = row[c].clone();
            for j in c + 1..cols {
                let v = &pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = pivot;
        rank += 1;
    }
    Elimination { rank, swaps }
}

/// Incrementally maintained column span over the rationals (reduced echelon basis).
#[derive(Debug, Clone, Default)]
pub struct RationalSpan {
    basis: Vec<(usize, Vec<Rational>)>,
}

impl RationalSpan {
    pub fn new() -> Self {
        RationalSpan::default()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Adds `v`; returns whether the span grew.
    pub fn insert(&mut self, mut v: Vec<Rational>) -> bool {
        for (pivot, b) in &self.basis {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        let Some(pivot) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = Rational::one() / &v[pivot];
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for (_, b) in self.basis.iter_mut() {
            if !b[pivot].is_zero() {
                let f = b[pivot].clone();
                for (x, y) in b.iter_mut().zip(&v) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        self.basis.push((pivot, v));
        true
    }
}
