use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::uni::write_term;
use super::{PolyError, RatFunc};
use crate::arith::{FFElem, Rat};

/// Exponent vector, one entry per declared variable.
pub type Monomial = Vec<u32>;

/// Sparse polynomial over ℚ in an ordered list of named variables.
///
/// Binary operations accept operands over different variable lists; the result
/// lives over the union (left operand's variables first). Equality ignores
/// the declared variable lists and compares the polynomials themselves.
#[derive(Debug, Clone)]
pub struct MultiPoly {
    vars: Vec<String>,
    terms: BTreeMap<Monomial, Rat>,
}

/// A ring in which polynomials can be evaluated.
pub trait Evaluator {
    type Value: Clone;
    fn coeff(&self, c: &Rat) -> Self::Value;
    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
    fn mul(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;
}

struct RatFuncEval<'a>(&'a str);

impl Evaluator for RatFuncEval<'_> {
    type Value = RatFunc;
    fn coeff(&self, c: &Rat) -> RatFunc {
        RatFunc::constant(self.0, c.clone())
    }
    fn add(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a + b
    }
    fn mul(&self, a: &RatFunc, b: &RatFunc) -> RatFunc {
        a * b
    }
}

struct RatEval;

impl Evaluator for RatEval {
    type Value = Rat;
    fn coeff(&self, c: &Rat) -> Rat {
        c.clone()
    }
    fn add(&self, a: &Rat, b: &Rat) -> Rat {
        a + b
    }
    fn mul(&self, a: &Rat, b: &Rat) -> Rat {
        a * b
    }
}

fn merge_vars(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    for v in b {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

impl MultiPoly {
    pub fn zero(vars: &[impl AsRef<str>]) -> Self {
        MultiPoly {
            vars: vars.iter().map(|v| v.as_ref().to_string()).collect(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms(
        vars: &[impl AsRef<str>],
        terms: impl IntoIterator<Item = (Monomial, Rat)>,
    ) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.len(), p.vars.len(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn constant(vars: &[impl AsRef<str>], c: Rat) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(vec![0; n], c)])
    }

    pub fn int(vars: &[impl AsRef<str>], c: i64) -> Self {
        Self::constant(vars, Rat::from_integer(c.into()))
    }

    /// The variable `name`, which is appended to `vars` when missing.
    pub fn var(vars: &[impl AsRef<str>], name: &str) -> Self {
        let mut p = Self::zero(vars);
        if !p.vars.iter().any(|v| v == name) {
            p.vars.push(name.to_string());
        }
        let idx = p.var_index(name).unwrap();
        let mut m = vec![0; p.vars.len()];
        m[idx] = 1;
        p.terms.insert(m, Rat::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e == 0))
    }

    pub fn constant_term(&self) -> Rat {
        self.terms
            .get(&vec![0; self.vars.len()])
            .cloned()
            .unwrap_or_else(Rat::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.iter().sum()).max()
    }

    pub fn degree_in(&self, name: &str) -> u32 {
        match self.var_index(name) {
            None => 0,
            Some(i) => self.terms.keys().map(|m| m[i]).max().unwrap_or(0),
        }
    }

    /// Variables that occur with positive exponent, in declared order.
    pub fn occurring_vars(&self) -> Vec<String> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(i, _)| self.terms.keys().any(|m| m[*i] > 0))
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// `Some(name)` when `self` is exactly one variable with coefficient 1.
    pub fn as_var(&self) -> Option<&str> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if !c.is_one() || m.iter().sum::<u32>() != 1 {
            return None;
        }
        m.iter().position(|&e| e == 1).map(|i| self.vars[i].as_str())
    }

    /// Re-expresses `self` over `vars`, which must contain every occurring variable.
    pub fn align_to(&self, vars: &[String]) -> MultiPoly {
        let map: Vec<Option<usize>> = self
            .vars
            .iter()
            .map(|v| vars.iter().position(|w| w == v))
            .collect();
        let mut out = MultiPoly {
            vars: vars.to_vec(),
            terms: BTreeMap::new(),
        };
        for (m, c) in &self.terms {
            let mut nm = vec![0; vars.len()];
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    let j = map[i].unwrap_or_else(|| panic!("variable `{}` not in target list", self.vars[i]));
                    nm[j] = e;
                }
            }
            out.add_term(nm, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MultiPoly {
        MultiPoly::from_terms(&self.vars, self.terms.iter().map(|(m, a)| (m.clone(), a * c)))
    }

    pub fn pow(&self, e: u32) -> MultiPoly {
        let mut acc = MultiPoly::constant(&self.vars, Rat::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn derivative(&self, name: &str) -> MultiPoly {
        let Some(i) = self.var_index(name) else {
            return MultiPoly::zero(&self.vars);
        };
        MultiPoly::from_terms(
            &self.vars,
            self.terms.iter().filter(|(m, _)| m[i] > 0).map(|(m, c)| {
                let mut nm = m.clone();
                nm[i] -= 1;
                (nm, c * Rat::from_integer(m[i].into()))
            }),
        )
    }

    /// Evaluates at `point`, given in declared variable order.
    pub fn evaluate<E: Evaluator>(&self, ev: &E, point: &[E::Value]) -> E::Value {
        assert_eq!(point.len(), self.vars.len());
        let mut acc: Option<E::Value> = None;
        for (m, c) in &self.terms {
            let mut t = ev.coeff(c);
            for (i, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    t = ev.mul(&t, &point[i]);
                }
            }
            acc = Some(match acc {
                None => t,
                Some(a) => ev.add(&a, &t),
            });
        }
        acc.unwrap_or_else(|| ev.coeff(&Rat::zero()))
    }

    pub fn eval_rat(&self, point: &[Rat]) -> Result<Rat, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::DimensionMismatch {
                expected: self.vars.len(),
                got: point.len(),
            });
        }
        Ok(self.evaluate(&RatEval, point))
    }

    /// Value and gradient at an exact rational point (typically an integer lift).
    pub fn linear_part_at(&self, lift: &[Rat]) -> Result<(Rat, Vec<Rat>), PolyError> {
        let value = self.eval_rat(lift)?;
        let grad = self
            .vars
            .iter()
            .map(|v| self.derivative(v).eval_rat(lift))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((value, grad))
    }

    /// Integer lifts in `0..p` of prime-field points.
    pub fn lift_point(point: &[FFElem]) -> Option<Vec<Rat>> {
        point
            .iter()
            .map(|a| a.as_prime_field().map(|c| Rat::from_integer(c.into())))
            .collect()
    }

    /// Substitutes every variable of `self` into `x`-rational functions.
    pub fn eval_ratfunc(
        &self,
        var: &str,
        map: &BTreeMap<String, RatFunc>,
    ) -> Result<RatFunc, PolyError> {
        let point = self
            .vars
            .iter()
            .enumerate()
            .map(|(i, v)| match map.get(v) {
                Some(f) => Ok(f.clone()),
                None if self.terms.keys().all(|m| m[i] == 0) => Ok(RatFunc::constant(var, Rat::zero())),
                None => Err(PolyError::UnmappedVariable(v.clone())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.evaluate(&RatFuncEval(var), &point))
    }

    /// Ring homomorphism sending each occurring variable to its image; every
    /// occurring variable must be mapped.
    pub fn substitute(&self, map: &BTreeMap<String, MultiPoly>) -> Result<MultiPoly, PolyError> {
        if let Some(v) = self.occurring_vars().into_iter().find(|v| !map.contains_key(v)) {
            return Err(PolyError::UnmappedVariable(v));
        }
        Ok(self.substitute_some(map))
    }

    /// Like [`substitute`](Self::substitute) but unmapped variables are kept.
    pub fn substitute_some(&self, map: &BTreeMap<String, MultiPoly>) -> MultiPoly {
        let mut target: Vec<String> = Vec::new();
        for v in &self.vars {
            match map.get(v) {
                Some(img) => target = merge_vars(&target, &img.vars),
                None => target = merge_vars(&target, std::slice::from_ref(v)),
            }
        }
        let images: Vec<MultiPoly> = self
            .vars
            .iter()
            .map(|v| match map.get(v) {
                Some(img) => img.align_to(&target),
                None => MultiPoly::var(&target, v),
            })
            .collect();
        let mut acc = MultiPoly::zero(&target);
        for (m, c) in &self.terms {
            let mut t = MultiPoly::constant(&target, c.clone());
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = &t * &images[i].pow(e);
                }
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Sets `name` to zero.
    pub fn restrict_zero(&self, name: &str) -> MultiPoly {
        match self.var_index(name) {
            None => self.clone(),
            Some(i) => MultiPoly::from_terms(
                &self.vars,
                self.terms
                    .iter()
                    .filter(|(m, _)| m[i] == 0)
                    .map(|(m, c)| (m.clone(), c.clone())),
            ),
        }
    }

    /// Largest `k` with `name^k` dividing `self` (0 for the zero polynomial).
    pub fn var_order(&self, name: &str) -> u32 {
        match self.var_index(name) {
            None => 0,
            Some(i) => self.terms.keys().map(|m| m[i]).min().unwrap_or(0),
        }
    }

    /// Divides by `name^k`; panics when not divisible.
    pub fn div_var_power(&self, name: &str, k: u32) -> MultiPoly {
        if k == 0 {
            return self.clone();
        }
        let i = self.var_index(name).expect("variable present");
        MultiPoly::from_terms(
            &self.vars,
            self.terms.iter().map(|(m, c)| {
                let mut nm = m.clone();
                nm[i] = nm[i].checked_sub(k).expect("divisible by variable power");
                (nm, c.clone())
            }),
        )
    }

    /// Leading monomial under lex order on the declared variables.
    fn lex_lead(&self) -> Option<(&Monomial, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Exact quotient over ℚ, `None` when `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        if d.is_zero() {
            return None;
        }
        let vars = merge_vars(&self.vars, &d.vars);
        let d = d.align_to(&vars);
        let mut rem = self.align_to(&vars);
        let mut quo = MultiPoly::zero(&vars);
        let (dm, dc) = d.lex_lead().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        while let Some((m, c)) = rem.lex_lead().map(|(m, c)| (m.clone(), c.clone())) {
            if m.iter().zip(&dm).any(|(a, b)| a < b) {
                return None;
            }
            let qm: Monomial = m.iter().zip(&dm).map(|(a, b)| a - b).collect();
            let qc = &c / &dc;
            let t = MultiPoly::from_terms(&vars, [(qm, qc)]);
            rem = &rem - &(&t * &d);
            quo = &quo + &t;
        }
        Some(quo)
    }

    pub fn rename(&self, renames: &BTreeMap<String, String>) -> MultiPoly {
        MultiPoly {
            vars: self
                .vars
                .iter()
                .map(|v| renames.get(v).cloned().unwrap_or_else(|| v.clone()))
                .collect(),
            terms: self.terms.clone(),
        }
    }

    fn grlex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
        let da: u32 = a.iter().sum();
        let db: u32 = b.iter().sum();
        da.cmp(&db).then_with(|| a.cmp(b))
    }

    /// Terms in descending graded-lex order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &Rat)> {
        let mut t: Vec<_> = self.terms.iter().collect();
        t.sort_by(|a, b| Self::grlex_cmp(b.0, a.0));
        t
    }

    fn monomial_string(&self, m: &Monomial) -> String {
        let parts: Vec<String> = m
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, &e)| {
                if e == 1 {
                    self.vars[i].clone()
                } else {
                    format!("{}^{}", self.vars[i], e)
                }
            })
            .collect();
        parts.join("*")
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        let vars = merge_vars(&self.vars, &other.vars);
        self.align_to(&vars).terms == other.align_to(&vars).terms
    }
}

impl Eq for MultiPoly {}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                let vars = merge_vars(&self.vars, &rhs.vars);
                let a = self.align_to(&vars);
                let b = rhs.align_to(&vars);
                $body(a, b, vars)
            }
        }
    };
}

binop!(Add, add, |a: MultiPoly, b: MultiPoly, _vars: Vec<String>| {
    let mut out = a;
    for (m, c) in b.terms {
        out.add_term(m, c);
    }
    out
});

binop!(Sub, sub, |a: MultiPoly, b: MultiPoly, _vars: Vec<String>| {
    let mut out = a;
    for (m, c) in b.terms {
        out.add_term(m, -c);
    }
    out
});

binop!(Mul, mul, |a: MultiPoly, b: MultiPoly, vars: Vec<String>| {
    let mut out = MultiPoly::zero(&vars);
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            let m: Monomial = ma.iter().zip(mb).map(|(x, y)| x + y).collect();
            out.add_term(m, ca * cb);
        }
    }
    out
});

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-Rat::one())
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            write_term(f, c, &self.monomial_string(m), i == 0)?;
        }
        Ok(())
    }
}
