use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use super::fp::FpPoly;
use super::points::{exact_degree_points, jacobian_row, p_row, rank, FieldEval};
use super::ResolveError;
use crate::arith::{FFElem, Prime, Rat};
use crate::poly::MultiPoly;

/// Largest supported ambient dimension for point enumeration.
pub const MAX_AMBIENT: usize = 4;

/// The first equation of a special-fiber curve: the prime itself, or a
/// variable dividing the monomial that p equals on the chart.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FiberEq {
    P,
    Var(String),
}

/// An irreducible curve `V(e, g)` of the special fiber, with `g` monic over F_p
/// and free of `e`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalCurve {
    pub e: FiberEq,
    pub g: FpPoly,
}

impl LocalCurve {
    pub fn equations(&self, p: Prime) -> Vec<MultiPoly> {
        let vars = self.g.vars();
        let e = match &self.e {
            FiberEq::P => MultiPoly::constant(vars, p.as_rat()),
            FiberEq::Var(v) => MultiPoly::var(vars, v),
        };
        vec![e, self.g.to_multi()]
    }

    /// True when the polynomial `q` vanishes identically on the curve.
    pub fn contains_zero_set_of(&self, q: &MultiPoly, p: Prime) -> Result<bool, ResolveError> {
        let q = match &self.e {
            FiberEq::P => q.clone(),
            FiberEq::Var(v) => q.restrict_zero(v),
        };
        let vars = self.g.vars().to_vec();
        let qbar = FpPoly::from_multi(&q.align_to(&merge(&vars, q.vars())), p)?;
        let g = self.g.align_to(qbar.vars());
        Ok(g.divides(&qbar))
    }

    pub fn passes_through(&self, pt: &[FFElem]) -> bool {
        let field = pt[0].field().clone();
        let on_e = match &self.e {
            FiberEq::P => true,
            FiberEq::Var(v) => {
                let i = self.g.index(v).expect("curve variables match the chart");
                pt[i].is_zero()
            }
        };
        on_e && self.g.to_multi().evaluate(&FieldEval(field), pt).is_zero()
    }

    /// True when the curve lies in the hyperplane `name = 0`.
    pub fn inside(&self, name: &str) -> bool {
        self.e == FiberEq::Var(name.to_string()) || self.g.as_var() == Some(name)
    }
}

impl fmt::Display for LocalCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.e {
            FiberEq::P => write!(f, "<{}, {}>", self.g.prime(), self.g),
            FiberEq::Var(v) => write!(f, "<{}, {}>", v, self.g),
        }
    }
}

pub(crate) fn merge(a: &[String], b: &[String]) -> Vec<String> {
    let mut out = a.to_vec();
    for v in b {
        if !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorRecord {
    pub label: String,
    pub equations: Vec<MultiPoly>,
    pub birth_step: usize,
    pub center_dim: u32,
    pub curve: Option<LocalCurve>,
}

/// How a chart maps to its parent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartMap {
    pub parent: usize,
    pub step: usize,
    /// Parent variable ↦ polynomial in the chart's variables.
    pub forward: BTreeMap<String, MultiPoly>,
    /// Chart variable ↦ numerator and denominator in the parent's variables.
    pub inverse: BTreeMap<String, (MultiPoly, MultiPoly)>,
    pub center: Option<Center>,
}

/// The point blown up (in parent coordinates) and the chart's projective
/// direction coordinates on the exceptional locus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Center {
    pub point: Vec<u64>,
    pub direction: Vec<MultiPoly>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineChart {
    pub id: usize,
    pub name: String,
    pub vars: Vec<String>,
    /// `p = Π v^a` when present; otherwise p is a parameter of the chart.
    pub relation: Option<BTreeMap<String, u32>>,
    pub generators: Vec<MultiPoly>,
    pub divisors: Vec<DivisorRecord>,
    pub map: Option<ChartMap>,
}

impl AffineChart {
    /// A standalone hypersurface chart, with fiber components labeled `D0, D1, …`.
    pub fn hypersurface(
        name: &str,
        vars: &[String],
        f: MultiPoly,
        relation: Option<BTreeMap<String, u32>>,
        p: Prime,
    ) -> Result<Self, ResolveError> {
        let mut chart = AffineChart {
            id: 0,
            name: name.to_string(),
            vars: vars.to_vec(),
            relation,
            generators: vec![f.align_to(vars)],
            divisors: Vec::new(),
            map: None,
        };
        chart.divisors = chart
            .fiber_curves(p)?
            .into_iter()
            .enumerate()
            .map(|(i, (c, _))| DivisorRecord {
                label: format!("D{i}"),
                equations: c.equations(p),
                birth_step: 0,
                center_dim: 1,
                curve: Some(c),
            })
            .collect();
        Ok(chart)
    }

    pub fn is_hypersurface(&self) -> bool {
        self.generators.len() == 1
    }

    pub(crate) fn require_hypersurface(&self) -> Result<&MultiPoly, ResolveError> {
        if self.is_hypersurface() {
            Ok(&self.generators[0])
        } else {
            Err(ResolveError::NotHypersurface(self.name.clone()))
        }
    }

    /// The monomial `M` with `p = M`, as a polynomial.
    pub fn relation_poly(&self) -> Option<MultiPoly> {
        self.relation.as_ref().map(|rel| {
            let m: Vec<u32> = self.vars.iter().map(|v| rel.get(v).copied().unwrap_or(0)).collect();
            MultiPoly::from_terms(&self.vars, [(m, Rat::from_integer(1.into()))])
        })
    }

    /// Variables dividing the relation monomial, in chart order.
    pub fn fiber_vars(&self) -> Vec<String> {
        match &self.relation {
            None => Vec::new(),
            Some(rel) => self.vars.iter().filter(|v| rel.contains_key(*v)).cloned().collect(),
        }
    }

    /// Equations of the chart in `ℤ_(p)[vars]`: the relation `p − M` when present, then the generators.
    pub fn equations(&self, p: Prime) -> Vec<MultiPoly> {
        let mut out = Vec::new();
        if let Some(m) = self.relation_poly() {
            out.push(&MultiPoly::constant(&self.vars, p.as_rat()) - &m);
        }
        out.extend(self.generators.iter().map(|g| g.align_to(&self.vars)));
        out
    }

    pub fn relation_string(&self, p: Prime) -> Option<String> {
        self.relation_poly().map(|m| format!("{} = {}", p.get(), m))
    }

    pub fn on_special_fiber(&self, p: Prime, pt: &[FFElem]) -> bool {
        let field = pt[0].field().clone();
        let fe = FieldEval(field);
        self.equations(p)
            .iter()
            .all(|g| g.evaluate(&fe, pt).is_zero())
    }

    fn check_enumerable(&self, k_max: usize) -> Result<(), ResolveError> {
        if k_max > crate::arith::MAX_EXTENSION_DEGREE {
            return Err(ResolveError::KMaxTooLarge(k_max));
        }
        if self.vars.len() > MAX_AMBIENT {
            return Err(ResolveError::AmbientTooLarge(self.vars.len()));
        }
        Ok(())
    }

    /// Points of the special fiber over `F_{p^k}` of exact degree `k`, for `k ≤ k_max`.
    pub fn special_fiber_points(&self, p: Prime, k_max: usize) -> Result<Vec<Vec<FFElem>>, ResolveError> {
        self.check_enumerable(k_max)?;
        let mut out = Vec::new();
        for k in 1..=k_max {
            for pt in exact_degree_points(p, k, self.vars.len())? {
                if self.on_special_fiber(p, &pt) {
                    out.push(pt);
                }
            }
        }
        Ok(out)
    }

    fn jacobian(&self, p: Prime, pt: &[FFElem]) -> Result<Vec<Vec<FFElem>>, ResolveError> {
        self.equations(p).iter().map(|g| jacobian_row(g, pt)).collect()
    }

    /// Regularity by the arithmetic Jacobian criterion for a complete intersection.
    pub fn is_regular_at(&self, p: Prime, pt: &[FFElem]) -> Result<bool, ResolveError> {
        self.require_hypersurface()?;
        let rows = self.jacobian(p, pt)?;
        Ok(rank(&rows) == rows.len())
    }

    fn curve_rows(&self, c: &LocalCurve, pt: &[FFElem]) -> Result<Vec<Vec<FFElem>>, ResolveError> {
        let field = pt[0].field().clone();
        let mut rows = Vec::new();
        match &c.e {
            FiberEq::P => rows.push(p_row(&field, self.vars.len())),
            FiberEq::Var(v) => rows.push(jacobian_row(&MultiPoly::var(&self.vars, v), pt)?),
        }
        rows.push(jacobian_row(&c.g.to_multi().align_to(&self.vars), pt)?);
        Ok(rows)
    }

    /// Special-fiber curves with their multiplicities in the divisor of p.
    pub fn fiber_curves(&self, p: Prime) -> Result<Vec<(LocalCurve, u32)>, ResolveError> {
        let h = self.require_hypersurface()?.align_to(&self.vars);
        let pm = p.get();
        match &self.relation {
            None => {
                let fbar = FpPoly::from_multi(&h, p)?;
                if fbar.is_zero() {
                    return Err(ResolveError::Invalid(format!("{} is divisible by p", h)));
                }
                let (_, fs) = fbar.factor()?;
                Ok(fs
                    .into_iter()
                    .map(|(g, k)| (LocalCurve { e: FiberEq::P, g }, k))
                    .collect())
            }
            Some(rel) => {
                let mut curves: Vec<LocalCurve> = Vec::new();
                let fiber = self.fiber_vars();
                for w in &fiber {
                    let r = FpPoly::from_multi(&h.restrict_zero(w), p)?;
                    if r.is_zero() {
                        return Err(ResolveError::Invalid(format!("{h} vanishes on {w} = 0")));
                    }
                    for g in r.irreducible_factors()? {
                        let c = canonical_curve(w, g, &fiber, &self.vars);
                        if !curves.contains(&c) {
                            curves.push(c);
                        }
                    }
                }
                curves.sort();
                let mut out = Vec::new();
                for c in curves {
                    let mut mult = 0;
                    for (v, a) in rel {
                        if !c.inside(v) {
                            continue;
                        }
                        let other = if c.e == FiberEq::Var(v.clone()) {
                            c.g.clone()
                        } else {
                            match &c.e {
                                FiberEq::Var(e) => FpPoly::var(pm, &self.vars, e),
                                FiberEq::P => unreachable!(),
                            }
                        };
                        let r = FpPoly::from_multi(&h.restrict_zero(v), p)?;
                        mult += a * r.multiplicity_of(&other.align_to(r.vars()));
                    }
                    out.push((c, mult));
                }
                Ok(out)
            }
        }
    }

    /// Divisor records passing through the point.
    pub fn divisors_through(&self, pt: &[FFElem]) -> Vec<&DivisorRecord> {
        self.divisors
            .iter()
            .filter(|d| d.curve.as_ref().is_some_and(|c| c.passes_through(pt)))
            .collect()
    }

    pub fn snc_at(&self, p: Prime, pt: &[FFElem]) -> Result<SncDiagnosis, ResolveError> {
        if !self.is_regular_at(p, pt)? {
            return Err(ResolveError::SingularPoint(format!("{} at {}", self.name, fmt_point(pt))));
        }
        let through = self.divisors_through(pt);
        let labels: Vec<String> = through.iter().map(|d| d.label.clone()).collect();
        let base = self.jacobian(p, pt)?;
        let n = self.vars.len();
        let mut irregular = Vec::new();
        for d in &through {
            let mut rows = base.clone();
            rows.extend(self.curve_rows(d.curve.as_ref().unwrap(), pt)?);
            if rank(&rows) != n {
                irregular.push(d.label.clone());
            }
        }
        let mut transverse = None;
        if through.len() == 2 {
            let mut rows = base.clone();
            for d in &through {
                rows.extend(self.curve_rows(d.curve.as_ref().unwrap(), pt)?);
            }
            transverse = Some(rank(&rows) == n + 1);
        }
        let reason = if through.len() > 2 {
            Some(format!("{} components meet", through.len()))
        } else if !irregular.is_empty() {
            Some(format!("{} singular here", irregular.join(", ")))
        } else if transverse == Some(false) {
            Some("components are tangent".to_string())
        } else {
            None
        };
        Ok(SncDiagnosis {
            components: labels,
            irregular,
            transverse,
            snc: reason.is_none(),
            reason,
        })
    }
}

/// Orders `V(w, v)` for two fiber variables so each curve has one representation.
fn canonical_curve(w: &str, g: FpPoly, fiber: &[String], vars: &[String]) -> LocalCurve {
    if let Some(v) = g.as_var() {
        if fiber.iter().any(|f| f == v) {
            let (iw, iv) = (
                vars.iter().position(|x| x == w).unwrap(),
                vars.iter().position(|x| x == v).unwrap(),
            );
            if iv < iw {
                let v = v.to_string();
                return LocalCurve {
                    e: FiberEq::Var(v),
                    g: FpPoly::var(g.prime(), vars, w),
                };
            }
        }
    }
    LocalCurve {
        e: FiberEq::Var(w.to_string()),
        g: g.align_to(vars),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SncDiagnosis {
    pub components: Vec<String>,
    pub irregular: Vec<String>,
    pub transverse: Option<bool>,
    pub snc: bool,
    pub reason: Option<String>,
}

pub fn fmt_point(pt: &[FFElem]) -> String {
    let parts: Vec<String> = pt.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Singular points of the chart's special fiber over `F_{p^k}`, `k ≤ k_max`.
pub fn special_fiber_singular_points(
    chart: &AffineChart,
    p: Prime,
    k_max: usize,
) -> Result<Vec<Vec<FFElem>>, ResolveError> {
    chart.require_hypersurface()?;
    let mut out = Vec::new();
    for pt in chart.special_fiber_points(p, k_max)? {
        if !chart.is_regular_at(p, &pt)? {
            out.push(pt);
        }
    }
    Ok(out)
}

pub fn is_snc_at(chart: &AffineChart, p: Prime, pt: &[FFElem]) -> Result<SncDiagnosis, ResolveError> {
    chart.snc_at(p, pt)
}
