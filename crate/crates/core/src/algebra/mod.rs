//! Exact arithmetic: rationals, polynomials in `σ`, polynomial and rational
//! matrices with exact rank and determinant.

pub mod matrix;
pub mod poly;
pub mod rational;

pub use matrix::{check_compliance, AlgebraError, ComplianceViolation, PolyMatrix, RationalMatrix, RationalSpan};
pub use poly::Polynomial;
pub use rational::Rational;
