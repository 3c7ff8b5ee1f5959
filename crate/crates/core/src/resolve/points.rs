//! Evaluation of integral polynomials at F_q-points and their lifts to the
//! Galois ring of length two, plus rank computations over F_q.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::ResolveError;
use crate::arith::{FFElem, FiniteField, Prime, Rat};
use crate::poly::{Evaluator, MultiPoly};

/// Evaluation in F_q.
pub(crate) struct FieldEval(pub Arc<FiniteField>);

impl Evaluator for FieldEval {
    type Value = FFElem;
    fn coeff(&self, c: &Rat) -> FFElem {
        self.0.from_rat(c).expect("p-integral coefficient")
    }
    fn add(&self, a: &FFElem, b: &FFElem) -> FFElem {
        a.add(b).expect("same field")
    }
    fn mul(&self, a: &FFElem, b: &FFElem) -> FFElem {
        a.mul(b).expect("same field")
    }
}

/// Evaluation in `(ℤ/p²)[t]/(H)`, where `H` lifts the field's modulus.
pub(crate) struct GaloisRing2 {
    p: u64,
    p2: u64,
    modulus: Vec<u64>,
}

impl GaloisRing2 {
    pub fn new(field: &FiniteField) -> Self {
        let p = field.char();
        GaloisRing2 {
            p,
            p2: p * p,
            modulus: field.modulus().to_vec(),
        }
    }

    fn k(&self) -> usize {
        self.modulus.len() - 1
    }

    pub fn lift(&self, a: &FFElem) -> Vec<u64> {
        a.coeffs().to_vec()
    }

    fn reduce(&self, mut c: Vec<u64>) -> Vec<u64> {
        let k = self.k();
        while c.len() > k {
            let top = c.pop().unwrap();
            if top == 0 {
                continue;
            }
            let off = c.len() - k;
            for (i, &h) in self.modulus[..k].iter().enumerate() {
                c[off + i] = (c[off + i] + self.p2 - top * h % self.p2) % self.p2;
            }
        }
        c.resize(k, 0);
        c
    }

    /// `a/p mod p`, assuming every coefficient of `a` is divisible by p.
    pub fn div_p(&self, a: &[u64], field: &Arc<FiniteField>) -> FFElem {
        debug_assert!(a.iter().all(|c| c % self.p == 0));
        field.from_coeffs(&a.iter().map(|c| c / self.p).collect::<Vec<_>>())
    }

    pub fn is_divisible_by_p(&self, a: &[u64]) -> bool {
        a.iter().all(|c| c % self.p == 0)
    }
}

impl Evaluator for GaloisRing2 {
    type Value = Vec<u64>;
    fn coeff(&self, c: &Rat) -> Vec<u64> {
        let m = BigInt::from(self.p2);
        let num = c.numer().mod_floor(&m);
        let den = c.denom().mod_floor(&m);
        let den_inv = mod_inverse_big(&den, &m).expect("p-integral coefficient");
        let v = (num * den_inv).mod_floor(&m).to_u64().unwrap();
        let mut out = vec![0; self.k()];
        out[0] = v;
        out
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        a.iter().zip(b).map(|(x, y)| (x + y) % self.p2).collect()
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut c = vec![0u64; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                c[i + j] = (c[i + j] + x * y) % self.p2;
            }
        }
        self.reduce(c)
    }
}

fn mod_inverse_big(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd == BigInt::from(1) {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// One row `[g(ã)/p, ∂g/∂v_1(ã), …]` of the arithmetic Jacobian at a point.
pub(crate) fn jacobian_row(g: &MultiPoly, point: &[FFElem]) -> Result<Vec<FFElem>, ResolveError> {
    let field = point
        .first()
        .map(|a| a.field().clone())
        .ok_or_else(|| ResolveError::Invalid("empty point".into()))?;
    let ring = GaloisRing2::new(&field);
    let lift: Vec<Vec<u64>> = point.iter().map(|a| ring.lift(a)).collect();
    let value = g.evaluate(&ring, &lift);
    if !ring.is_divisible_by_p(&value) {
        return Err(ResolveError::PointNotOnSurface(format!("{g} does not vanish")));
    }
    let mut row = vec![ring.div_p(&value, &field)];
    let fe = FieldEval(field);
    for v in g.vars() {
        row.push(g.derivative(v).evaluate(&fe, point));
    }
    Ok(row)
}

/// The row of the constant p: `[1, 0, …, 0]`.
pub(crate) fn p_row(field: &Arc<FiniteField>, n: usize) -> Vec<FFElem> {
    let mut row = vec![field.one()];
    row.extend((0..n).map(|_| field.zero()));
    row
}

pub(crate) fn rank(rows: &[Vec<FFElem>]) -> usize {
    let mut m: Vec<Vec<FFElem>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(piv) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, piv);
        let inv = m[r][c].inv().unwrap();
        let pivot_row: Vec<FFElem> = m[r].iter().map(|x| x.mul(&inv).unwrap()).collect();
        m[r] = pivot_row.clone();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let t = f.mul(&pivot_row[j]).unwrap();
                    m[i][j] = m[i][j].sub(&t).unwrap();
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// All points of `F_{p^k}^n` whose coordinates generate `F_{p^k}` exactly,
/// in lexicographic order of coefficient vectors.
pub(crate) fn exact_degree_points(p: Prime, k: usize, n: usize) -> Result<Vec<Vec<FFElem>>, ResolveError> {
    let field = FiniteField::with_degree(p, k)?;
    let elems: Vec<FFElem> = field.elements().collect();
    let q = elems.len();
    let total = q.checked_pow(n as u32).ok_or(ResolveError::AmbientTooLarge(n))?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let pt: Vec<FFElem> = idx.iter().map(|&i| elems[i].clone()).collect();
        if generated_degree(&pt) == k {
            out.push(pt);
        }
        for d in idx.iter_mut().rev() {
            *d += 1;
            if *d == q {
                *d = 0;
            } else {
                break;
            }
        }
    }
    Ok(out)
}

/// Degree over F_p of the field generated by the coordinates.
pub(crate) fn generated_degree(pt: &[FFElem]) -> usize {
    let Some(first) = pt.first() else { return 1 };
    let k = first.field().degree();
    (1..=k)
        .filter(|d| k % d == 0)
        .find(|&d| {
            pt.iter().all(|a| {
                let mut b = a.clone();
                for _ in 0..d {
                    b = b.frobenius();
                }
                &b == a
            })
        })
        .unwrap_or(k)
}

/// Coordinates as integer coefficient vectors, for identities and logs.
pub(crate) fn coords_of(pt: &[FFElem]) -> Vec<Vec<u64>> {
    pt.iter().map(|a| a.coeffs().to_vec()).collect()
}
