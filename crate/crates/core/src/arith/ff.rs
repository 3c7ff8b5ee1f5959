use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use super::rational::{mod_inverse, padic_unit_mod, Prime, Rat};

/// Largest extension degree accepted by [`FiniteField::new`].
pub const MAX_EXTENSION_DEGREE: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FfError {
    #[error("extension degree {0} outside 1..={MAX_EXTENSION_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("defining polynomial must be monic of degree {expected}")]
    BadModulus { expected: usize },
    #[error("defining polynomial is reducible over F_{0}")]
    Reducible(u64),
    #[error("inverse of zero")]
    InverseOfZero,
    #[error("operands belong to different finite fields")]
    MismatchedFields,
    #[error("rational {0} is not p-integral")]
    NotIntegral(String),
}

/// `F_{p^k} = F_p[t]/(h)` for a monic irreducible `h` of degree `k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteField {
    p: Prime,
    /// Coefficients of `h`, lowest degree first, length `k + 1`, leading 1.
    modulus: Vec<u64>,
}

impl FiniteField {
    pub fn new(p: Prime, modulus: Vec<u64>) -> Result<Arc<Self>, FfError> {
        let k = modulus.len().saturating_sub(1);
        if k == 0 || k > MAX_EXTENSION_DEGREE {
            return Err(FfError::DegreeOutOfRange(k));
        }
        let pm = p.get();
        let modulus: Vec<u64> = modulus.into_iter().map(|c| c % pm).collect();
        if modulus[k] != 1 {
            return Err(FfError::BadModulus { expected: k });
        }
        if !is_irreducible(&modulus, pm) {
            return Err(FfError::Reducible(pm));
        }
        Ok(Arc::new(FiniteField { p, modulus }))
    }

    /// The prime field `F_p`.
    pub fn prime_field(p: Prime) -> Arc<Self> {
        Arc::new(FiniteField {
            p,
            modulus: vec![0, 1],
        })
    }

    /// `F_{p^k}` with the lexicographically smallest monic irreducible modulus.
    pub fn with_degree(p: Prime, k: usize) -> Result<Arc<Self>, FfError> {
        if k == 0 || k > MAX_EXTENSION_DEGREE {
            return Err(FfError::DegreeOutOfRange(k));
        }
        if k == 1 {
            return Ok(Self::prime_field(p));
        }
        let pm = p.get();
        for idx in 0..pm.pow(k as u32) {
            let mut h = digits(idx, pm, k);
            h.push(1);
            if is_irreducible(&h, pm) {
                return Self::new(p, h);
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn prime(&self) -> Prime {
        self.p
    }

    pub fn char(&self) -> u64 {
        self.p.get()
    }

    pub fn degree(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn order(&self) -> u64 {
        self.char().pow(self.degree() as u32)
    }

    pub fn zero(self: &Arc<Self>) -> FFElem {
        FFElem {
            field: self.clone(),
            coeffs: vec![0; self.degree()],
        }
    }

    pub fn one(self: &Arc<Self>) -> FFElem {
        self.from_u64(1)
    }

    pub fn from_u64(self: &Arc<Self>, n: u64) -> FFElem {
        let mut e = self.zero();
        e.coeffs[0] = n % self.char();
        e
    }

    pub fn from_i64(self: &Arc<Self>, n: i64) -> FFElem {
        self.from_u64(n.rem_euclid(self.char() as i64) as u64)
    }

    pub fn from_rat(self: &Arc<Self>, q: &Rat) -> Result<FFElem, FfError> {
        padic_unit_mod(q, self.p)
            .map(|r| self.from_u64(r))
            .ok_or_else(|| FfError::NotIntegral(q.to_string()))
    }

    /// The class of `t`.
    pub fn generator(self: &Arc<Self>) -> FFElem {
        let mut e = self.zero();
        if self.degree() == 1 {
            e.coeffs[0] = (self.char() - self.modulus[0]) % self.char();
        } else {
            e.coeffs[1] = 1;
        }
        e
    }

    pub fn from_coeffs(self: &Arc<Self>, coeffs: &[u64]) -> FFElem {
        let mut e = self.zero();
        let red = reduce(coeffs.iter().map(|c| c % self.char()).collect(), &self.modulus, self.char());
        e.coeffs[..red.len()].copy_from_slice(&red);
        e
    }

    /// All elements, in the order of their coefficient vectors read as base-p digits.
    pub fn elements(self: &Arc<Self>) -> impl Iterator<Item = FFElem> + '_ {
        let k = self.degree();
        let p = self.char();
        (0..self.order()).map(move |idx| FFElem {
            field: self.clone(),
            coeffs: digits(idx, p, k),
        })
    }
}

impl fmt::Display for FiniteField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree() == 1 {
            write!(f, "F_{}", self.p)
        } else {
            write!(f, "F_{}^{}", self.p, self.degree())
        }
    }
}

fn digits(mut idx: u64, p: u64, k: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push(idx % p);
        idx /= p;
    }
    out
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    trim(out)
}

/// Remainder of `a` modulo the monic polynomial `h`.
fn reduce(a: Vec<u64>, h: &[u64], p: u64) -> Vec<u64> {
    let mut a = trim(a);
    let k = h.len() - 1;
    while a.len() > k {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - k;
        for (i, &hc) in h.iter().enumerate() {
            a[shift + i] = (a[shift + i] + p - (lead * hc) % p) % p;
        }
        a = trim(a);
    }
    a
}

/// Remainder of `a` modulo a general nonzero `b` over `F_p`.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let b = trim(b.to_vec());
    let inv = mod_inverse(*b.last().unwrap(), p);
    let monic: Vec<u64> = b.iter().map(|c| c * inv % p).collect();
    reduce(a.to_vec(), &monic, p)
}

fn is_irreducible(h: &[u64], p: u64) -> bool {
    let k = h.len() - 1;
    for d in 1..=k / 2 {
        for idx in 0..p.pow(d as u32) {
            let mut g = digits(idx, p, d);
            g.push(1);
            if poly_rem(h, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// An element of a finite field, stored as a residue representative of degree `< k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FFElem {
    field: Arc<FiniteField>,
    coeffs: Vec<u64>,
}

impl FFElem {
    pub fn field(&self) -> &Arc<FiniteField> {
        &self.field
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// `Some(c)` when the element lies in the prime field.
    pub fn as_prime_field(&self) -> Option<u64> {
        if self.coeffs[1..].iter().all(|&c| c == 0) {
            Some(self.coeffs[0])
        } else {
            None
        }
    }

    fn check(&self, other: &FFElem) -> Result<(), FfError> {
        if Arc::ptr_eq(&self.field, &other.field) || self.field == other.field {
            Ok(())
        } else {
            Err(FfError::MismatchedFields)
        }
    }

    fn with(&self, coeffs: Vec<u64>) -> FFElem {
        let mut c = coeffs;
        c.resize(self.field.degree(), 0);
        FFElem {
            field: self.field.clone(),
            coeffs: c,
        }
    }

    pub fn add(&self, other: &FFElem) -> Result<FFElem, FfError> {
        self.check(other)?;
        let p = self.field.char();
        Ok(self.with(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| (a + b) % p)
                .collect(),
        ))
    }

    pub fn neg(&self) -> FFElem {
        let p = self.field.char();
        self.with(self.coeffs.iter().map(|a| (p - a) % p).collect())
    }

    pub fn sub(&self, other: &FFElem) -> Result<FFElem, FfError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &FFElem) -> Result<FFElem, FfError> {
        self.check(other)?;
        let p = self.field.char();
        let prod = poly_mul(&trim(self.coeffs.clone()), &trim(other.coeffs.clone()), p);
        Ok(self.with(reduce(prod, &self.field.modulus, p)))
    }

    pub fn pow(&self, mut e: u64) -> FFElem {
        let mut base = self.clone();
        let mut acc = self.field.one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base).expect("same field");
            }
            base = base.mul(&base).expect("same field");
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self) -> Result<FFElem, FfError> {
        if self.is_zero() {
            return Err(FfError::InverseOfZero);
        }
        Ok(self.pow(self.field.order() - 2))
    }

    pub fn frobenius(&self) -> FFElem {
        self.pow(self.field.char())
    }
}

impl fmt::Display for FFElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            terms.push(match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "t".to_string(),
                (1, c) => format!("{c}*t"),
                (i, 1) => format!("t^{i}"),
                (i, c) => format!("{c}*t^{i}"),
            });
        }
        if terms.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&terms.join(" + "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u64) -> Prime {
        Prime::new(n).unwrap()
    }

    #[test]
    fn f3_examples() {
        let f = FiniteField::prime_field(p(3));
        let two = f.from_u64(2);
        assert_eq!(two.add(&two).unwrap(), f.from_u64(1));
        assert_eq!(two.inv().unwrap(), two);
    }

    #[test]
    fn f4_example() {
        let f = FiniteField::new(p(2), vec![1, 1, 1]).unwrap();
        let t = f.generator();
        assert_eq!(t.mul(&t).unwrap(), f.from_coeffs(&[1, 1]));
    }

    #[test]
    fn errors() {
        let f = FiniteField::prime_field(p(3));
        assert_eq!(f.zero().inv(), Err(FfError::InverseOfZero));
        let g = FiniteField::prime_field(p(5));
        assert_eq!(f.one().add(&g.one()), Err(FfError::MismatchedFields));
        assert_eq!(
            FiniteField::new(p(3), vec![2, 0, 1]).unwrap_err(),
            FfError::Reducible(3)
        );
        assert_eq!(
            FiniteField::with_degree(p(3), 5).unwrap_err(),
            FfError::DegreeOutOfRange(5)
        );
    }

    #[test]
    fn multiplicative_group_order() {
        for (pr, k) in [(2, 1), (2, 3), (3, 2), (5, 2), (2, 4), (3, 4)] {
            let f = FiniteField::with_degree(p(pr), k).unwrap();
            let q = f.order();
            for a in f.elements().filter(|a| !a.is_zero()) {
                assert_eq!(a.pow(q - 1), f.one(), "{a} in {f}");
                assert_eq!(a.mul(&a.inv().unwrap()).unwrap(), f.one());
            }
        }
    }

    #[test]
    fn frobenius_is_additive_and_bijective() {
        let f = FiniteField::with_degree(p(3), 3).unwrap();
        let elems: Vec<_> = f.elements().collect();
        let mut images: Vec<_> = elems.iter().map(|a| a.frobenius().coeffs().to_vec()).collect();
        images.sort();
        images.dedup();
        assert_eq!(images.len(), elems.len());
        for a in elems.iter().step_by(5) {
            for b in elems.iter().step_by(7) {
                assert_eq!(
                    a.add(b).unwrap().frobenius(),
                    a.frobenius().add(&b.frobenius()).unwrap()
                );
                assert_eq!(
                    a.mul(b).unwrap().frobenius(),
                    a.frobenius().mul(&b.frobenius()).unwrap()
                );
            }
        }
    }
}
