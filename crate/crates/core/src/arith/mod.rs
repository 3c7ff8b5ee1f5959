//! Exact arithmetic: big rationals, p-adic valuations on the rationals,
//! valuation values extended by infinity, and small finite fields.

mod ff;
mod rational;

pub use ff::{FFElem, FfError, FiniteField, MAX_EXTENSION_DEGREE};
pub use rational::{
    format_rat, is_prime, padic_unit_mod, padic_val, parse_rat, ExtVal, ExtValError, Prime,
    PrimeError, Rat,
};
mod linalg;

pub use linalg::{det, leading_principal_minors};

/// Binary/unary finite-field operation selector for [`ff_arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FfOp {
    Add,
    Mul,
    Inv,
    Pow(u64),
}

/// Applies `op` to `a` (and `b` for the binary operations).
pub fn ff_arith(a: &FFElem, b: &FFElem, op: FfOp) -> Result<FFElem, FfError> {
    match op {
        FfOp::Add => a.add(b),
        FfOp::Mul => a.mul(b),
        FfOp::Inv => a.inv(),
        FfOp::Pow(e) => Ok(a.pow(e)),
    }
}
