//! MacLane inductive valuations on ℚ(x) extending the p-adic valuation.
//!
//! Only necessary conditions on key polynomials are enforced by [`InductiveValuation::augment`]:
//! monic, p-integral, degree divisible by the previous key's degree, and λ strictly
//! above the current value. Whether φ is a genuine key polynomial is not decided.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::arith::{format_rat, padic_val, parse_rat, ExtVal, Prime, PrimeError, Rat};
use crate::poly::parse::parse_uni;
use crate::poly::{PolyError, RatFunc, UniPoly};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValuationError {
    #[error("λ = {lambda} must exceed the current value {current} of the key")]
    LambdaNotGreater { lambda: String, current: String },
    #[error("key polynomial must be monic")]
    NonMonicKey,
    #[error("key polynomial has a coefficient that is not p-integral")]
    NonIntegralKey,
    #[error("key polynomial must have positive degree")]
    ConstantKey,
    #[error("key degree {deg} is not a multiple of the previous key degree {prev}")]
    DegreeNotMultiple { deg: usize, prev: usize },
    #[error(transparent)]
    Prime(#[from] PrimeError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("cannot parse valuation: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentationStep {
    pub phi: UniPoly,
    pub lambda: Rat,
}

/// `[v0, v1(φ1)=λ1, …, vn(φn)=λn]` over the p-adic valuation on ℚ, normalized by v(p) = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InductiveValuation {
    p: Prime,
    steps: Vec<AugmentationStep>,
}

impl InductiveValuation {
    /// Gauss valuation with respect to `x`.
    pub fn gauss(p: Prime) -> Self {
        InductiveValuation { p, steps: Vec::new() }
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn steps(&self) -> &[AugmentationStep] {
        &self.steps
    }

    pub fn augment(&self, phi: &UniPoly, lambda: Rat) -> Result<Self, ValuationError> {
        let deg = match phi.degree() {
            Some(d) if d >= 1 => d,
            _ => return Err(ValuationError::ConstantKey),
        };
        if !phi.is_monic() {
            return Err(ValuationError::NonMonicKey);
        }
        if !phi.is_integral(self.p) {
            return Err(ValuationError::NonIntegralKey);
        }
        if let Some(last) = self.steps.last() {
            let prev = last.phi.degree().unwrap();
            if deg % prev != 0 {
                return Err(ValuationError::DegreeNotMultiple { deg, prev });
            }
        }
        let current = self.evaluate(phi);
        if ExtVal::Finite(lambda.clone()) <= current {
            return Err(ValuationError::LambdaNotGreater {
                lambda: format_rat(&lambda),
                current: current.to_string(),
            });
        }
        let mut steps = self.steps.clone();
        steps.push(AugmentationStep {
            phi: phi.with_var("x"),
            lambda,
        });
        Ok(InductiveValuation { p: self.p, steps })
    }

    /// The valuation with only the first `n` augmentation steps.
    pub fn truncate(&self, n: usize) -> Self {
        InductiveValuation {
            p: self.p,
            steps: self.steps[..n.min(self.steps.len())].to_vec(),
        }
    }

    pub fn evaluate(&self, f: &UniPoly) -> ExtVal {
        self.eval_level(&f.with_var("x"), self.steps.len())
    }

    fn eval_level(&self, f: &UniPoly, level: usize) -> ExtVal {
        if f.is_zero() {
            return ExtVal::Infinity;
        }
        if level == 0 {
            return f
                .coeffs()
                .iter()
                .map(|c| padic_val(c, self.p))
                .fold(ExtVal::Infinity, ExtVal::min);
        }
        let step = &self.steps[level - 1];
        let parts = f.phi_expand(&step.phi).expect("keys are monic");
        parts
            .iter()
            .enumerate()
            .map(|(i, fi)| self.eval_level(fi, level - 1) + &(&step.lambda * Rat::from_integer(i.into())))
            .fold(ExtVal::Infinity, ExtVal::min)
    }

    pub fn evaluate_rat(&self, f: &RatFunc) -> ExtVal {
        let num = self.evaluate(f.num());
        let den = self.evaluate(f.den());
        num.checked_sub(&den).expect("denominator is nonzero")
    }

    /// Lcm of the denominators of the λᵢ.
    pub fn ramification_index(&self) -> u64 {
        let e = self
            .steps
            .iter()
            .fold(BigInt::one(), |acc, s| acc.lcm(s.lambda.denom()));
        u64::try_from(e).expect("ramification index fits in u64")
    }

    /// Values of both valuations on each sample, paired.
    pub fn compare_on(&self, other: &InductiveValuation, samples: &[UniPoly]) -> Vec<(ExtVal, ExtVal)> {
        samples
            .iter()
            .map(|f| (self.evaluate(f), other.evaluate(f)))
            .collect()
    }
}

fn compact(f: &UniPoly) -> String {
    f.to_string().replace(' ', "")
}

impl fmt::Display for InductiveValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[v0({})", self.p.get())?;
        for s in &self.steps {
            write!(f, ", v({})={}", compact(&s.phi), format_rat(&s.lambda))?;
        }
        f.write_str("]")
    }
}

impl FromStr for InductiveValuation {
    type Err = ValuationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| ValuationError::Parse(m.to_string());
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| bad("expected `[...]`"))?;
        let mut items = inner.split(',').map(str::trim);
        let head = items.next().unwrap_or("");
        let p: u64 = head
            .strip_prefix("v0(")
            .and_then(|t| t.strip_suffix(')'))
            .and_then(|t| t.trim().parse().ok())
            .ok_or_else(|| bad("expected `v0(p)` first"))?;
        let mut v = InductiveValuation::gauss(Prime::new(p)?);
        for item in items {
            let body = item
                .strip_prefix("v(")
                .ok_or_else(|| bad("expected `v(φ)=λ`"))?;
            let (poly, lambda) = body
                .rsplit_once(")=")
                .ok_or_else(|| bad("expected `v(φ)=λ`"))?;
            let phi = parse_uni(poly, "x")?;
            let lambda = parse_rat(lambda.trim()).map_err(ValuationError::Parse)?;
            v = v.augment(&phi, lambda)?;
        }
        Ok(v)
    }
}

impl serde::Serialize for InductiveValuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for InductiveValuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
