//! Sparse multivariate polynomials over F_p, with factorization by bounded search.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::ResolveError;
use crate::arith::{padic_unit_mod, Prime, Rat};
use crate::poly::MultiPoly;

/// Candidate factors tried before giving up.
const SEARCH_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FpPoly {
    p: u64,
    vars: Vec<String>,
    terms: BTreeMap<Vec<u32>, u64>,
}

fn inv_mod(a: u64, p: u64) -> u64 {
    crate::arith::padic_unit_mod(&Rat::new(1.into(), a.into()), Prime::new(p).unwrap()).unwrap()
}

impl FpPoly {
    pub fn zero(p: u64, vars: &[String]) -> Self {
        FpPoly {
            p,
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn var(p: u64, vars: &[String], name: &str) -> Self {
        let mut f = Self::zero(p, vars);
        let i = f.index(name).expect("variable declared");
        let mut m = vec![0; vars.len()];
        m[i] = 1;
        f.terms.insert(m, 1);
        f
    }

    pub fn constant(p: u64, vars: &[String], c: u64) -> Self {
        let mut f = Self::zero(p, vars);
        f.add_term(vec![0; vars.len()], c);
        f
    }

    /// Reduction mod p of a polynomial with p-integral coefficients.
    pub fn from_multi(f: &MultiPoly, p: Prime) -> Result<Self, ResolveError> {
        let mut out = Self::zero(p.get(), f.vars());
        for (m, c) in f.terms() {
            let r = reduce_rat(c, p)?;
            out.add_term(m.clone(), r);
        }
        Ok(out)
    }

    /// Lift with coefficients in `(−p/2, p/2]`.
    pub fn to_multi(&self) -> MultiPoly {
        let p = self.p as i64;
        MultiPoly::from_terms(
            &self.vars,
            self.terms.iter().map(|(m, &c)| {
                let c = c as i64;
                let c = if c > p / 2 { c - p } else { c };
                (m.clone(), Rat::from_integer(c.into()))
            }),
        )
    }

    fn add_term(&mut self, m: Vec<u32>, c: u64) {
        let c = c % self.p;
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e = (*e + c) % self.p;
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &u64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().sum()).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(|m| m.iter().sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    pub fn occurring_vars(&self) -> Vec<String> {
        (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|m| m[i] > 0))
            .map(|i| self.vars[i].clone())
            .collect()
    }

    pub fn involves(&self, name: &str) -> bool {
        self.index(name)
            .is_some_and(|i| self.terms.keys().any(|m| m[i] > 0))
    }

    /// `Some(name)` when the polynomial is a single variable.
    pub fn as_var(&self) -> Option<&str> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, &c) = self.terms.iter().next().unwrap();
        if c != 1 || m.iter().sum::<u32>() != 1 {
            return None;
        }
        m.iter().position(|&e| e == 1).map(|i| self.vars[i].as_str())
    }

    /// Re-expresses over `vars`, which must contain every occurring variable.
    pub fn align_to(&self, vars: &[String]) -> FpPoly {
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v))
            .collect();
        let mut out = FpPoly::zero(self.p, vars);
        for (m, &c) in &self.terms {
            let mut nm = vec![0; vars.len()];
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    nm[map[i].expect("variable present in target")] = e;
                }
            }
            out.add_term(nm, c);
        }
        out
    }

    fn leading(&self) -> Option<(&Vec<u32>, u64)> {
        self.terms.iter().next_back().map(|(m, &c)| (m, c))
    }

    /// Scales so that the lex-leading coefficient is 1.
    pub fn monic(&self) -> FpPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => self.scale(inv_mod(c, self.p)),
        }
    }

    pub fn scale(&self, c: u64) -> FpPoly {
        let mut out = FpPoly::zero(self.p, &self.vars);
        for (m, &a) in &self.terms {
            out.add_term(m.clone(), a * (c % self.p));
        }
        out
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let other = other.align_to(&self.vars);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        self.add(&other.scale(self.p - 1))
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        let other = other.align_to(&self.vars);
        let mut out = FpPoly::zero(self.p, &self.vars);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                let m = a.iter().zip(b).map(|(x, y)| x + y).collect();
                out.add_term(m, ca * cb % self.p);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> FpPoly {
        let mut acc = FpPoly::constant(self.p, &self.vars, 1);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient, `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &FpPoly) -> Option<FpPoly> {
        let d = d.align_to(&self.vars);
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c))?;
        let dinv = inv_mod(dc, self.p);
        let mut rem = self.clone();
        let mut quo = FpPoly::zero(self.p, &self.vars);
        while let Some((m, c)) = rem.leading().map(|(m, c)| (m.clone(), c)) {
            if m.iter().zip(&dm).any(|(a, b)| a < b) {
                return None;
            }
            let qm: Vec<u32> = m.iter().zip(&dm).map(|(a, b)| a - b).collect();
            let mut t = FpPoly::zero(self.p, &self.vars);
            t.add_term(qm, c * dinv % self.p);
            rem = rem.sub(&t.mul(&d));
            quo = quo.add(&t);
        }
        Some(quo)
    }

    pub fn divides(&self, f: &FpPoly) -> bool {
        f.is_zero() || f.div_exact(self).is_some()
    }

    /// Sets `name` to the constant `c`.
    pub fn set_var(&self, name: &str, c: u64) -> FpPoly {
        let Some(i) = self.index(name) else {
            return self.clone();
        };
        let mut out = FpPoly::zero(self.p, &self.vars);
        for (m, &a) in &self.terms {
            let mut nm = m.clone();
            let e = nm[i];
            nm[i] = 0;
            let mut v = a;
            for _ in 0..e {
                v = v * c % self.p;
            }
            out.add_term(nm, v);
        }
        out
    }

    /// Substitutes each listed variable by a polynomial over `target` variables.
    pub fn substitute(&self, map: &BTreeMap<String, FpPoly>, target: &[String]) -> FpPoly {
        let images: Vec<FpPoly> = self
            .vars
            .iter()
            .map(|v| match map.get(v) {
                Some(img) => img.align_to(target),
                None => FpPoly::var(self.p, target, v),
            })
            .collect();
        let mut out = FpPoly::zero(self.p, target);
        for (m, &c) in &self.terms {
            let mut t = FpPoly::constant(self.p, target, c);
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = t.mul(&images[i].pow(e));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Exponent of the largest power of `name` dividing `self`.
    pub fn var_order(&self, name: &str) -> u32 {
        match self.index(name) {
            None => 0,
            Some(i) => self.terms.keys().map(|m| m[i]).min().unwrap_or(0),
        }
    }

    /// Factorization into monic irreducibles with exponents, plus the unit.
    /// Factors are sorted by (degree, polynomial) for determinism.
    pub fn factor(&self) -> Result<(u64, Vec<(FpPoly, u32)>), ResolveError> {
        if self.is_zero() {
            return Err(ResolveError::Factorization("zero polynomial".into()));
        }
        let unit = self.leading().unwrap().1;
        let mut rest = self.monic();
        let mut out = Vec::new();
        for v in self.vars.clone() {
            let k = rest.var_order(&v);
            if k > 0 {
                let x = FpPoly::var(self.p, &self.vars, &v);
                rest = rest.div_exact(&x.pow(k)).unwrap();
                out.push((x, k));
            }
        }
        while !rest.is_constant() {
            let g = smallest_factor(&rest)?;
            let mut k = 0;
            while let Some(q) = rest.div_exact(&g) {
                rest = q;
                k += 1;
            }
            out.push((g, k));
        }
        out.sort_by(|a, b| (a.0.total_degree(), &a.0).cmp(&(b.0.total_degree(), &b.0)));
        Ok((unit, out))
    }

    /// Irreducible factors without multiplicity.
    pub fn irreducible_factors(&self) -> Result<Vec<FpPoly>, ResolveError> {
        Ok(self.factor()?.1.into_iter().map(|(g, _)| g).collect())
    }

    /// Multiplicity of the irreducible `g` in `self`.
    pub fn multiplicity_of(&self, g: &FpPoly) -> u32 {
        let mut k = 0;
        let mut rest = self.clone();
        while !rest.is_zero() {
            match rest.div_exact(g) {
                Some(q) => {
                    rest = q;
                    k += 1;
                }
                None => break,
            }
        }
        k
    }
}

fn reduce_rat(c: &Rat, p: Prime) -> Result<u64, ResolveError> {
    if c.is_zero() {
        return Ok(0);
    }
    match crate::arith::padic_val(c, p) {
        crate::arith::ExtVal::Finite(v) if v < Rat::zero() => {
            Err(ResolveError::NotIntegral(crate::arith::format_rat(c)))
        }
        crate::arith::ExtVal::Finite(v) if v > Rat::zero() => Ok(0),
        _ => Ok(padic_unit_mod(c, p).unwrap()),
    }
}

/// Monomials in the occurring variables with per-variable and total degree bounds.
fn monomials(bounds: &[u32], max_total: u32, exact: Option<u32>) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; bounds.len()];
    fn rec(i: usize, left: u32, bounds: &[u32], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, exact: Option<u32>) {
        if i == bounds.len() {
            let d: u32 = cur.iter().sum();
            if exact.is_none_or(|e| e == d) {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=bounds[i].min(left) {
            cur[i] = e;
            rec(i + 1, left - e, bounds, cur, out, exact);
        }
        cur[i] = 0;
    }
    rec(0, max_total, bounds, &mut cur, &mut out, exact);
    out
}

/// The lowest-degree monic divisor of positive degree, which is irreducible.
fn smallest_factor(f: &FpPoly) -> Result<FpPoly, ResolveError> {
    let n = f.vars.len();
    let d = f.total_degree();
    let bounds: Vec<u32> = (0..n)
        .map(|i| f.terms.keys().map(|m| m[i]).max().unwrap_or(0))
        .collect();
    let homogeneous = f.is_homogeneous();
    let p = f.p;
    let mut tried: u64 = 0;
    for deg in 1..=d / 2 {
        let mons = monomials(&bounds, deg, homogeneous.then_some(deg));
        let top: Vec<usize> = (0..mons.len())
            .filter(|&i| mons[i].iter().sum::<u32>() == deg)
            .collect();
        let count = (p as f64).powi(mons.len() as i32);
        if tried as f64 + count > SEARCH_CAP as f64 {
            return Err(ResolveError::Factorization(format!(
                "search space too large for {f}"
            )));
        }
        let mut coeffs = vec![0u64; mons.len()];
        loop {
            tried += 1;
            if top.iter().any(|&i| coeffs[i] != 0) {
                let mut g = FpPoly::zero(p, &f.vars);
                for (m, &c) in mons.iter().zip(&coeffs) {
                    g.add_term(m.clone(), c);
                }
                if g.leading().is_some_and(|(_, c)| c == 1) {
                    if f.div_exact(&g).is_some() {
                        return Ok(g);
                    }
                }
            }
            let mut i = 0;
            loop {
                if i == coeffs.len() {
                    break;
                }
                coeffs[i] += 1;
                if coeffs[i] == p {
                    coeffs[i] = 0;
                    i += 1;
                } else {
                    break;
                }
            }
            if i == coeffs.len() {
                break;
            }
        }
    }
    Ok(f.monic())
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_multi().fmt(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse::parse_multi;

    fn fp(s: &str, vars: &[&str]) -> FpPoly {
        FpPoly::from_multi(&parse_multi(s, vars).unwrap(), Prime::new(3).unwrap()).unwrap()
    }

    fn product(unit: u64, fs: &[(FpPoly, u32)], like: &FpPoly) -> FpPoly {
        let mut acc = FpPoly::constant(like.prime(), like.vars(), unit);
        for (g, k) in fs {
            acc = acc.mul(&g.pow(*k));
        }
        acc
    }

    #[test]
    fn factor_examples() {
        let vars = ["x", "y", "z"];
        let f = fp("x*y - y^2", &vars);
        let (u, fs) = f.factor().unwrap();
        assert_eq!(fs.len(), 2);
        assert_eq!(product(u, &fs, &f), f);
        let f = fp("s^3*x - 3*s^2*x + 3*x - 9", &["x", "s"]);
        let (_, fs) = f.factor().unwrap();
        assert_eq!(fs.iter().map(|(g, k)| (g.to_string(), *k)).collect::<Vec<_>>(),
            vec![("s".to_string(), 3), ("x".to_string(), 1)]);
        // x^2 + 1 is irreducible over F_3
        let f = fp("x^2 + 1", &vars);
        assert_eq!(f.factor().unwrap().1, vec![(f.clone(), 1)]);
        let f = fp("(x^2 + 1)*(x + y)^2*(y - z)", &vars);
        let (u, fs) = f.factor().unwrap();
        assert_eq!(fs.len(), 3);
        assert_eq!(product(u, &fs, &f), f);
        let g = fp("x + y", &vars).monic();
        assert_eq!(f.multiplicity_of(&g), 2);
    }

    #[test]
    fn division_and_reduction() {
        let vars = ["a", "b"];
        assert!(fp("a + b", &vars).divides(&fp("a^2 - b^2", &vars)));
        assert!(!fp("a + b", &vars).divides(&fp("a^2 + b^2", &vars)));
        assert!(matches!(
            FpPoly::from_multi(&parse_multi("a/3", &vars).unwrap(), Prime::new(3).unwrap()),
            Err(ResolveError::NotIntegral(_))
        ));
        assert_eq!(fp("a/2 + 3*b", &vars).to_string(), "-a");
    }
}
