use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrimeError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
}

/// A rational prime, checked at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PrimeError> {
        if is_prime(p) {
            Ok(Prime(p))
        } else {
            Err(PrimeError::NotPrime(p))
        }
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn as_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    pub fn as_rat(self) -> Rat {
        Rat::from_integer(self.as_bigint())
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn int_val(n: &BigInt, p: &BigInt) -> u64 {
    let mut n = n.clone();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// Exponent of `p` in `q`; `Infinity` for zero.
pub fn padic_val(q: &Rat, p: Prime) -> ExtVal {
    if q.is_zero() {
        return ExtVal::Infinity;
    }
    let pb = p.as_bigint();
    let v = int_val(q.numer(), &pb) as i64 - int_val(q.denom(), &pb) as i64;
    ExtVal::from_int(v)
}

/// Residue of a p-integral rational in `0..p`. Returns `None` when `q` is not p-integral.
pub fn padic_unit_mod(q: &Rat, p: Prime) -> Option<u64> {
    let pb = p.as_bigint();
    let den = q.denom().mod_floor(&pb);
    if den.is_zero() {
        return None;
    }
    let num = q.numer().mod_floor(&pb);
    let den = den.to_u64().expect("residue fits u64");
    let inv = mod_inverse(den, p.get());
    let num = num.to_u64().expect("residue fits u64");
    Some(((num as u128 * inv as u128) % p.get() as u128) as u64)
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> u64 {
    let e = num_integer::Integer::extended_gcd(&(a as i128), &(m as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(m as i128) as u64
}

/// `n` for integers, `n/d` otherwise.
pub fn format_rat(q: &Rat) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat, String> {
    let s = s.trim();
    let parse_int =
        |t: &str| BigInt::from_str(t.trim()).map_err(|_| format!("invalid integer `{}`", t.trim()));
    match s.split_once('/') {
        None => Ok(Rat::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err("zero denominator".into());
            }
            Ok(Rat::new(parse_int(n)?, d))
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtValError {
    #[error("finite value minus infinity is undefined")]
    FiniteMinusInfinity,
}

/// A valuation value: a rational or `+∞`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtVal {
    Finite(Rat),
    Infinity,
}

impl ExtVal {
    pub fn from_int(v: i64) -> Self {
        ExtVal::Finite(Rat::from_integer(v.into()))
    }

    pub fn zero() -> Self {
        ExtVal::Finite(Rat::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtVal::Infinity)
    }

    pub fn finite(&self) -> Option<&Rat> {
        match self {
            ExtVal::Finite(q) => Some(q),
            ExtVal::Infinity => None,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    /// `∞ − x = ∞`; `x − ∞` is an error.
    pub fn checked_sub(&self, other: &ExtVal) -> Result<ExtVal, ExtValError> {
        match (self, other) {
            (ExtVal::Infinity, _) => Ok(ExtVal::Infinity),
            (ExtVal::Finite(_), ExtVal::Infinity) => Err(ExtValError::FiniteMinusInfinity),
            (ExtVal::Finite(a), ExtVal::Finite(b)) => Ok(ExtVal::Finite(a - b)),
        }
    }

    pub fn scale(&self, k: &Rat) -> ExtVal {
        match self {
            ExtVal::Infinity => ExtVal::Infinity,
            ExtVal::Finite(a) => ExtVal::Finite(a * k),
        }
    }
}

impl Add for ExtVal {
    type Output = ExtVal;
    fn add(self, rhs: ExtVal) -> ExtVal {
        match (self, rhs) {
            (ExtVal::Finite(a), ExtVal::Finite(b)) => ExtVal::Finite(a + b),
            _ => ExtVal::Infinity,
        }
    }
}

impl Add<&Rat> for ExtVal {
    type Output = ExtVal;
    fn add(self, rhs: &Rat) -> ExtVal {
        match self {
            ExtVal::Finite(a) => ExtVal::Finite(a + rhs),
            ExtVal::Infinity => ExtVal::Infinity,
        }
    }
}

impl PartialOrd for ExtVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtVal::Infinity, ExtVal::Infinity) => Ordering::Equal,
            (ExtVal::Infinity, _) => Ordering::Greater,
            (_, ExtVal::Infinity) => Ordering::Less,
            (ExtVal::Finite(a), ExtVal::Finite(b)) => a.cmp(b),
        }
    }
}

impl From<Rat> for ExtVal {
    fn from(q: Rat) -> Self {
        ExtVal::Finite(q)
    }
}

impl fmt::Display for ExtVal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtVal::Infinity => f.write_str("inf"),
            ExtVal::Finite(q) => f.write_str(&format_rat(q)),
        }
    }
}

impl FromStr for ExtVal {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim() == "inf" {
            Ok(ExtVal::Infinity)
        } else {
            parse_rat(s).map(ExtVal::Finite)
        }
    }
}

impl Serialize for ExtVal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtVal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
