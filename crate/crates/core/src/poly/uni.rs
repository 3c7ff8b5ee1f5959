use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};

use super::PolyError;
use crate::arith::{format_rat, Rat};

/// Dense univariate polynomial over ℚ. `coeffs[i]` is the coefficient of `var^i`;
/// the last entry is nonzero unless the polynomial is zero (empty vector).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UniPoly {
    var: String,
    coeffs: Vec<Rat>,
}

impl UniPoly {
    pub fn new(var: impl Into<String>, coeffs: Vec<Rat>) -> Self {
        let mut p = UniPoly {
            var: var.into(),
            coeffs,
        };
        p.trim();
        p
    }

    pub fn from_ints(var: impl Into<String>, coeffs: &[i64]) -> Self {
        Self::new(
            var,
            coeffs.iter().map(|&c| Rat::from_integer(c.into())).collect(),
        )
    }

    pub fn zero(var: impl Into<String>) -> Self {
        Self::new(var, Vec::new())
    }

    pub fn constant(var: impl Into<String>, c: Rat) -> Self {
        Self::new(var, vec![c])
    }

    pub fn one(var: impl Into<String>) -> Self {
        Self::constant(var, Rat::one())
    }

    /// The monomial `var^k`.
    pub fn monomial(var: impl Into<String>, k: usize) -> Self {
        let mut c = vec![Rat::zero(); k + 1];
        c[k] = Rat::one();
        Self::new(var, c)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    fn like(&self, coeffs: Vec<Rat>) -> Self {
        Self::new(self.var.clone(), coeffs)
    }

    pub fn var(&self) -> &str {
        &self.var
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` stands for the degree of the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn lead(&self) -> Rat {
        self.coeffs.last().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn scale(&self, c: &Rat) -> Self {
        self.like(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn make_monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut c = vec![Rat::zero(); k];
        c.extend(self.coeffs.iter().cloned());
        self.like(c)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = UniPoly::one(self.var.clone());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        self.like(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rat::from_integer(i.into()))
                .collect(),
        )
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        self.coeffs
            .iter()
            .rev()
            .fold(Rat::zero(), |acc, c| acc * x + c)
    }

    /// `self(inner)`.
    pub fn compose(&self, inner: &UniPoly) -> UniPoly {
        self.coeffs.iter().rev().fold(UniPoly::zero(inner.var.clone()), |acc, c| {
            &(&acc * inner) + &UniPoly::constant(inner.var.clone(), c.clone())
        })
    }

    /// Euclidean division over ℚ.
    pub fn div_rem(&self, d: &UniPoly) -> Result<(UniPoly, UniPoly), PolyError> {
        let dd = d.degree().ok_or(PolyError::DivisionByZero)?;
        let lead_inv = d.lead().recip();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return Ok((UniPoly::zero(self.var.clone()), self.clone()));
        }
        let mut q = vec![Rat::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                let t = &c * dc;
                r[i + j] -= t;
            }
            q[i] = c;
        }
        r.truncate(dd);
        Ok((self.like(q), self.like(r)))
    }

    /// Pseudo-remainder: `lead(d)^(deg self − deg d + 1)·self mod d`, exact over ℤ-coefficients.
    pub fn prem(&self, d: &UniPoly) -> Result<UniPoly, PolyError> {
        let dd = d.degree().ok_or(PolyError::DivisionByZero)?;
        let Some(ds) = self.degree() else {
            return Ok(self.clone());
        };
        if ds < dd {
            return Ok(self.clone());
        }
        let k = (ds - dd + 1) as i32;
        let factor = num_traits::pow(d.lead(), k as usize);
        Ok(self.scale(&factor).div_rem(d)?.1)
    }

    /// Monic gcd; `gcd(0, 0) = 0`.
    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.make_monic()
    }

    /// The φ-adic expansion `[f_0, …, f_r]` with `self = Σ f_i φ^i` and `deg f_i < deg φ`.
    pub fn phi_expand(&self, phi: &UniPoly) -> Result<Vec<UniPoly>, PolyError> {
        if !phi.is_monic() || phi.degree() == Some(0) {
            return Err(PolyError::NonMonicModulus);
        }
        let mut out = Vec::new();
        let mut rest = self.clone();
        loop {
            let (q, r) = rest.div_rem(phi)?;
            out.push(r);
            if q.is_zero() {
                break;
            }
            rest = q;
        }
        Ok(out)
    }

    /// Horner reconstruction `Σ parts[i] φ^i`.
    pub fn from_phi_expansion(parts: &[UniPoly], phi: &UniPoly) -> UniPoly {
        parts
            .iter()
            .rev()
            .fold(UniPoly::zero(phi.var.clone()), |acc, part| &(&acc * phi) + part)
    }

    /// Resultant via the subresultant pseudo-remainder sequence.
    pub fn resultant(&self, other: &UniPoly) -> Result<Rat, PolyError> {
        if self.is_zero() || other.is_zero() {
            return Err(PolyError::ZeroInput);
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        let mut s = Rat::one();
        let deg = |p: &UniPoly| p.degree().unwrap();
        if deg(&a) < deg(&b) {
            if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
                s = -s;
            }
            std::mem::swap(&mut a, &mut b);
        }
        let mut g = Rat::one();
        let mut h = Rat::one();
        loop {
            if deg(&b) == 0 {
                let da = deg(&a) as i32;
                let hb = rat_pow(&h, 1 - da) * rat_pow(&b.lead(), da);
                return Ok(s * hb);
            }
            let delta = (deg(&a) - deg(&b)) as i32;
            if deg(&a) % 2 == 1 && deg(&b) % 2 == 1 {
                s = -s;
            }
            let r = a.prem(&b)?;
            if r.is_zero() {
                return Ok(Rat::zero());
            }
            a = b;
            b = r.scale(&(g.clone() * rat_pow(&h, delta)).recip());
            g = a.lead();
            h = rat_pow(&h, 1 - delta) * rat_pow(&g, delta);
        }
    }

    /// The Sylvester matrix of `self` and `other` (rows of shifted coefficient vectors).
    pub fn sylvester_matrix(&self, other: &UniPoly) -> Vec<Vec<Rat>> {
        let m = self.degree().unwrap_or(0);
        let n = other.degree().unwrap_or(0);
        let size = m + n;
        let mut rows = Vec::with_capacity(size);
        for (poly, count, deg) in [(self, n, m), (other, m, n)] {
            for i in 0..count {
                let mut row = vec![Rat::zero(); size];
                for j in 0..=deg {
                    row[i + j] = poly.coeff(deg - j);
                }
                rows.push(row);
            }
        }
        rows
    }

    /// Whether all coefficients are p-integral.
    pub fn is_integral(&self, p: crate::arith::Prime) -> bool {
        self.coeffs
            .iter()
            .all(|c| crate::arith::padic_val(c, p) >= crate::arith::ExtVal::zero())
    }

    pub fn with_var(&self, var: impl Into<String>) -> UniPoly {
        UniPoly {
            var: var.into(),
            coeffs: self.coeffs.clone(),
        }
    }
}

fn rat_pow(x: &Rat, e: i32) -> Rat {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        self.like((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        self.like((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero(self.var.clone());
        }
        let mut c = vec![Rat::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        self.like(c)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        self.like(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mono = match i {
                0 => String::new(),
                1 => self.var.clone(),
                _ => format!("{}^{}", self.var, i),
            };
            write_term(f, c, &mono, first)?;
            first = false;
        }
        Ok(())
    }
}

/// Writes `±c*mono` in the shared polynomial print style.
pub(crate) fn write_term(
    f: &mut fmt::Formatter<'_>,
    c: &Rat,
    mono: &str,
    first: bool,
) -> fmt::Result {
    let neg = c.is_negative();
    let abs = c.abs();
    if first {
        if neg {
            f.write_str("-")?;
        }
    } else {
        f.write_str(if neg { " - " } else { " + " })?;
    }
    if mono.is_empty() {
        f.write_str(&format_rat(&abs))
    } else if abs.is_one() {
        f.write_str(mono)
    } else {
        write!(f, "{}*{}", format_rat(&abs), mono)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{det, padic_val, ExtVal, Prime};

    fn up(c: &[i64]) -> UniPoly {
        UniPoly::from_ints("x", c)
    }

    fn phi() -> UniPoly {
        up(&[3, 0, -3, 1])
    }

    #[test]
    fn phi_expand_examples() {
        let parts = up(&[0, 0, 0, 1]).phi_expand(&phi()).unwrap();
        assert_eq!(parts, vec![up(&[-3, 0, 3]), up(&[1])]);
        let small = up(&[1, 2]);
        assert_eq!(small.phi_expand(&phi()).unwrap(), vec![small.clone()]);
        let sq = phi().pow(2).phi_expand(&phi()).unwrap();
        assert_eq!(sq, vec![UniPoly::zero("x"), UniPoly::zero("x"), up(&[1])]);
        assert_eq!(
            up(&[1]).phi_expand(&up(&[1, 2])),
            Err(PolyError::NonMonicModulus)
        );
    }

    #[test]
    fn resultant_examples() {
        let a = Rat::from_integer(5.into());
        let b = Rat::from_integer((-2).into());
        let r = up(&[-5, 1]).resultant(&up(&[2, 1])).unwrap();
        assert_eq!(r.clone().abs(), (&a - &b).abs());
        assert_eq!(up(&[3, 0, 1]).resultant(&up(&[1])).unwrap(), Rat::one());
        let r = phi().resultant(&phi().derivative()).unwrap();
        assert_eq!(padic_val(&r, Prime::new(3).unwrap()), ExtVal::from_int(4));
        assert_eq!(r, det(&phi().sylvester_matrix(&phi().derivative())));
        assert_eq!(up(&[1, 1]).resultant(&UniPoly::zero("x")), Err(PolyError::ZeroInput));
    }

    #[test]
    fn display() {
        assert_eq!(phi().to_string(), "x^3 - 3*x^2 + 3");
        assert_eq!(up(&[0, -1]).to_string(), "-x");
        assert_eq!(
            UniPoly::new("x", vec![Rat::new(1.into(), 3.into())]).to_string(),
            "1/3"
        );
    }
}
