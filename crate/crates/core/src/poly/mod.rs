//! Exact polynomials over the rationals: dense univariate, sparse multivariate,
//! normalized rational functions, and a small expression parser.

mod multi;
pub mod parse;
mod ratfunc;
mod uni;

use thiserror::Error;

pub use multi::{Evaluator, Monomial, MultiPoly};
pub use ratfunc::RatFunc;
pub use uni::UniPoly;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("φ must be monic of positive degree")]
    NonMonicModulus,
    #[error("zero polynomial where a nonzero one is required")]
    ZeroInput,
    #[error("variable `{0}` has no image under the substitution")]
    UnmappedVariable(String),
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("coefficient {0} is not p-integral")]
    NotIntegral(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
