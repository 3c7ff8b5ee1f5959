use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{PolyError, UniPoly};
use crate::arith::Rat;

/// A reduced fraction of univariate polynomials with monic denominator.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: UniPoly,
    den: UniPoly,
}

impl RatFunc {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZero);
        }
        if num.is_zero() {
            return Ok(Self::from_poly(UniPoly::zero(den.var())));
        }
        let g = num.gcd(&den);
        let num = num.div_rem(&g)?.0;
        let den = den.div_rem(&g)?.0;
        let lc = den.lead().recip();
        Ok(RatFunc {
            num: num.scale(&lc),
            den: den.scale(&lc),
        })
    }

    pub fn from_poly(p: UniPoly) -> Self {
        let den = UniPoly::one(p.var());
        RatFunc { num: p, den }
    }

    pub fn constant(var: &str, c: Rat) -> Self {
        Self::from_poly(UniPoly::constant(var, c))
    }

    pub fn var_of(var: &str) -> Self {
        Self::from_poly(UniPoly::monomial(var, 1))
    }

    pub fn num(&self) -> &UniPoly {
        &self.num
    }

    pub fn den(&self) -> &UniPoly {
        &self.den
    }

    pub fn var(&self) -> &str {
        self.num.var()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == Some(0)
    }

    pub fn inv(&self) -> Result<RatFunc, PolyError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Result<RatFunc, PolyError> {
        Ok(self * &other.inv()?)
    }

    pub fn pow(&self, e: i32) -> Result<RatFunc, PolyError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let k = e.unsigned_abs();
        Ok(RatFunc {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    pub fn scale(&self, c: &Rat) -> RatFunc {
        if c.is_zero() {
            return RatFunc::constant(self.var(), Rat::zero());
        }
        RatFunc {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(
            &(&self.num * &rhs.den) + &(&rhs.num * &self.den),
            &self.den * &rhs.den,
        )
        .expect("nonzero denominators")
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero denominators")
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one_poly() {
            return write!(f, "{}", self.num);
        }
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl UniPoly {
    fn is_one_poly(&self) -> bool {
        self.degree() == Some(0) && self.lead().is_one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes() {
        let num = UniPoly::from_ints("x", &[-2, 0, 2]);
        let den = UniPoly::from_ints("x", &[2, 2]);
        let f = RatFunc::new(num, den).unwrap();
        assert_eq!(f.num(), &UniPoly::from_ints("x", &[-1, 1]));
        assert!(f.is_polynomial());
        let g = RatFunc::new(UniPoly::from_ints("x", &[1]), UniPoly::from_ints("x", &[0, 3]))
            .unwrap();
        assert_eq!(g.to_string(), "(1/3)/(x)");
        assert_eq!(
            RatFunc::new(UniPoly::from_ints("x", &[1]), UniPoly::zero("x")),
            Err(PolyError::DivisionByZero)
        );
    }

    #[test]
    fn reciprocal_product_is_one() {
        let a = RatFunc::new(
            UniPoly::from_ints("x", &[1, 2, 3]),
            UniPoly::from_ints("x", &[5, 0, 1]),
        )
        .unwrap();
        let one = &a * &a.inv().unwrap();
        assert_eq!(one, RatFunc::constant("x", Rat::one()));
    }
}
