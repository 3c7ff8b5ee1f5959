use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::chart::{fmt_point, AffineChart, Center, ChartMap, DivisorRecord, FiberEq};
use super::fp::FpPoly;
use super::ResolveError;
use crate::arith::{format_rat, padic_val, ExtVal, FiniteField, Prime, Rat};
use crate::poly::MultiPoly;
use crate::wildquot::ChartPresentation;

/// Letters tried, in order, for the variables of a new blow-up chart.
const FRESH_LETTERS: &[char] = &['y', 'w', 'u', 'q', 'r', 'v', 'a', 'b', 'c', 'd'];

fn rat(n: u64) -> Rat {
    Rat::from_integer(n.into())
}

/// The determinantal chart itself: minors as generators, no divisors yet.
pub(crate) fn root_chart(pres: &ChartPresentation) -> AffineChart {
    AffineChart {
        id: 0,
        name: "root".into(),
        vars: pres.variables.clone(),
        relation: None,
        generators: pres.minors.iter().map(|m| m.align_to(&pres.variables)).collect(),
        divisors: Vec::new(),
        map: None,
    }
}

/// Replaces the presentation by the incidence variety `N·(s, t)ᵀ = 0`,
/// returned as its affine charts `t = 1` and `s = 1` (in that order).
pub fn tjurina_transform(
    pres: &ChartPresentation,
    p: Prime,
) -> Result<[AffineChart; 2], ResolveError> {
    let upper = &pres.variables;
    let lower: Vec<String> = upper.iter().map(|v| v.to_lowercase()).collect();
    let renames: BTreeMap<String, String> =
        upper.iter().cloned().zip(lower.iter().cloned()).collect();
    let rows: Vec<[MultiPoly; 2]> = pres
        .matrix
        .iter()
        .map(|[a, b]| [a.rename(&renames), b.rename(&renames)])
        .collect();
    let first = pres
        .matrix
        .first()
        .ok_or_else(|| ResolveError::Invalid("empty presentation".into()))?;

    let build = |name: &str, extra: &str| -> AffineChart {
        let mut vars = lower.clone();
        vars.push(extra.to_string());
        let u = MultiPoly::var(&vars, extra);
        let generators = rows
            .iter()
            .map(|[a, b]| {
                let g = if extra == "s" { &(&u * a) - b } else { a - &(&u * b) };
                g.align_to(&vars)
            })
            .collect();
        let mut equations: Vec<MultiPoly> = lower.iter().map(|v| MultiPoly::var(&vars, v)).collect();
        equations.push(MultiPoly::constant(&vars, p.as_rat()));
        let forward = upper
            .iter()
            .zip(&lower)
            .map(|(up, lo)| (up.clone(), MultiPoly::var(&vars, lo)))
            .collect();
        let one = MultiPoly::int(upper, 1);
        let mut inverse: BTreeMap<String, (MultiPoly, MultiPoly)> = upper
            .iter()
            .zip(&lower)
            .map(|(up, lo)| (lo.clone(), (MultiPoly::var(upper, up), one.clone())))
            .collect();
        let (a, b) = (first[0].align_to(upper), first[1].align_to(upper));
        let one_c = MultiPoly::int(&vars, 1);
        let direction = if extra == "s" {
            inverse.insert("s".into(), (b, a));
            vec![u.clone(), one_c]
        } else {
            inverse.insert("t".into(), (a, b));
            vec![one_c, u.clone()]
        };
        AffineChart {
            id: 0,
            name: name.into(),
            vars,
            relation: None,
            generators,
            divisors: vec![DivisorRecord {
                label: "C0".into(),
                equations,
                birth_step: 0,
                center_dim: 0,
                curve: None,
            }],
            map: Some(ChartMap {
                parent: 0,
                step: 0,
                forward,
                inverse,
                center: Some(Center {
                    point: vec![0; upper.len()],
                    direction,
                }),
            }),
        }
    };
    Ok([build("t=1", "s"), build("s=1", "t")])
}

fn is_p_integral(f: &MultiPoly, p: Prime) -> bool {
    f.terms()
        .all(|(_, c)| matches!(padic_val(c, p), ExtVal::Finite(v) if v >= Rat::zero()))
}

/// Drops equations that are integral multiples of earlier (simpler) ones.
fn simplify_equations(eqs: &[MultiPoly], p: Prime) -> Vec<MultiPoly> {
    let mut sorted: Vec<&MultiPoly> = eqs.iter().filter(|e| !e.is_zero()).collect();
    sorted.sort_by_key(|e| (!e.is_constant(), e.total_degree().unwrap_or(0), e.num_terms()));
    let mut kept: Vec<MultiPoly> = Vec::new();
    for e in sorted {
        let redundant = kept
            .iter()
            .any(|k| e.div_exact(k).is_some_and(|q| is_p_integral(&q, p)));
        if !redundant {
            kept.push(e.clone());
        }
    }
    kept
}

/// Finds `(generator index, variable, unit coefficient)` for the first generator
/// of the form `c·v + rest` with `v` absent from `rest`.
fn eliminable(chart: &AffineChart) -> Option<(usize, String, Rat)> {
    for (gi, g) in chart.generators.iter().enumerate() {
        for v in &chart.vars {
            if g.degree_in(v) != 1 {
                continue;
            }
            let coeff = &g.derivative(v);
            if coeff.is_constant() && !coeff.is_zero() {
                return Some((gi, v.clone(), coeff.constant_term()));
            }
        }
    }
    None
}

/// Solves generators of the form `c·v + rest` for `v` until one generator remains.
pub fn eliminate_linear(chart: &AffineChart, p: Prime) -> Result<AffineChart, ResolveError> {
    if chart.is_hypersurface() {
        return Ok(chart.clone());
    }
    let mut vars = chart.vars.clone();
    let mut gens = chart.generators.clone();
    let mut eqs: Vec<Vec<MultiPoly>> = chart.divisors.iter().map(|d| d.equations.clone()).collect();
    let mut forward: BTreeMap<String, MultiPoly> = chart
        .vars
        .iter()
        .map(|v| (v.clone(), MultiPoly::var(&chart.vars, v)))
        .collect();
    while gens.len() > 1 {
        let probe = AffineChart {
            vars: vars.clone(),
            generators: gens.clone(),
            ..chart.clone()
        };
        let (gi, v, c) = eliminable(&probe).ok_or(ResolveError::NoEliminableGenerator)?;
        let g = gens.remove(gi);
        let rest = &g - &MultiPoly::var(&vars, &v).scale(&c);
        let expr = rest.scale(&(-Rat::one() / c));
        vars.retain(|w| w != &v);
        let sub: BTreeMap<String, MultiPoly> = [(v.clone(), expr.align_to(&vars))].into();
        gens = gens.iter().map(|h| h.substitute_some(&sub).align_to(&vars)).collect();
        for list in &mut eqs {
            *list = list.iter().map(|h| h.substitute_some(&sub).align_to(&vars)).collect();
        }
        for img in forward.values_mut() {
            *img = img.substitute_some(&sub);
        }
    }
    let forward = forward.into_iter().map(|(k, f)| (k, f.align_to(&vars))).collect();
    let inverse = vars
        .iter()
        .map(|v| {
            (
                v.clone(),
                (MultiPoly::var(&chart.vars, v), MultiPoly::int(&chart.vars, 1)),
            )
        })
        .collect();
    let divisors = chart
        .divisors
        .iter()
        .zip(eqs)
        .map(|(d, e)| DivisorRecord {
            equations: simplify_equations(&e, p),
            ..d.clone()
        })
        .collect();
    if gens[0].is_zero() {
        return Err(ResolveError::Invalid("elimination produced the zero polynomial".into()));
    }
    Ok(AffineChart {
        id: 0,
        name: chart.name.clone(),
        vars,
        relation: chart.relation.clone(),
        generators: gens,
        divisors,
        map: Some(ChartMap {
            parent: chart.id,
            step: 0,
            forward,
            inverse,
            center: None,
        }),
    })
}

/// Charts of a point blow-up, before divisor labels are assigned.
#[derive(Debug, Clone)]
pub struct BlowupOutcome {
    pub charts: Vec<AffineChart>,
    /// Lowest-order part of the equation at the point, over the center generators.
    pub initial_form: FpPoly,
    /// Its irreducible factors: the components of the new exceptional curve.
    pub factors: Vec<FpPoly>,
    /// Per chart: the equation of the exceptional divisor.
    pub exceptional: Vec<FiberEq>,
    /// Per chart and factor: the factor in the chart's coordinates.
    pub dehomogenized: Vec<Vec<FpPoly>>,
}

fn split_p(c: &Rat, p: Prime) -> Result<(u32, Rat), ResolveError> {
    match padic_val(c, p) {
        ExtVal::Finite(v) if v >= Rat::zero() => {
            let j = v.to_integer().try_into().unwrap_or(0u32);
            let pj = num_traits::pow(p.as_rat(), j as usize);
            Ok((j, c / pj))
        }
        _ => Err(ResolveError::NotIntegral(format_rat(c))),
    }
}

/// Rewrites `p^j·u·m` as `u·M^j·m` until no coefficient is divisible by p.
fn p_free(h: &MultiPoly, m: &MultiPoly, p: Prime) -> Result<MultiPoly, ResolveError> {
    let mut cur = h.clone();
    for _ in 0..64 {
        let mut changed = false;
        let mut next = MultiPoly::zero(cur.vars());
        for (mon, c) in cur.terms() {
            let (j, u) = split_p(c, p)?;
            let t = MultiPoly::from_terms(cur.vars(), [(mon.clone(), u)]);
            if j > 0 {
                changed = true;
                next = &next + &(&t * &m.pow(j));
            } else {
                next = &next + &t;
            }
        }
        cur = next.align_to(h.vars());
        if !changed {
            return Ok(cur);
        }
    }
    Err(ResolveError::Invalid(format!("{h} does not become p-free")))
}

fn fresh_letter(vars: &[String]) -> char {
    *FRESH_LETTERS
        .iter()
        .find(|&&l| !vars.iter().any(|v| v.starts_with(l)))
        .expect("a free letter")
}

fn monomial(vars: &[String], exps: &BTreeMap<&str, u32>, c: Rat) -> MultiPoly {
    let m = vars.iter().map(|v| exps.get(v.as_str()).copied().unwrap_or(0)).collect();
    MultiPoly::from_terms(vars, [(m, c)])
}

/// Blows up the F_p-rational point `point` of a hypersurface chart.
///
/// Without a relation the center is `(v − a, p)` and there is one chart per
/// variable plus the chart where p generates; with `p = M` the center is
/// `(v − a)` and the point must have zero coordinates along `M`.
pub fn blowup(chart: &AffineChart, p: Prime, point: &[u64]) -> Result<BlowupOutcome, ResolveError> {
    if !chart.is_hypersurface() {
        return Err(ResolveError::NotHypersurface(chart.name.clone()));
    }
    let n = chart.vars.len();
    if point.len() != n || point.iter().any(|&a| a >= p.get()) {
        return Err(ResolveError::Invalid(format!("bad point {point:?} for chart {}", chart.name)));
    }
    let field = FiniteField::prime_field(p);
    let pt: Vec<_> = point.iter().map(|&a| field.from_u64(a)).collect();
    if !chart.on_special_fiber(p, &pt) {
        return Err(ResolveError::PointNotOnSurface(fmt_point(&pt)));
    }
    let fiber = chart.fiber_vars();
    if let Some(v) = fiber.iter().find(|v| point[chart.vars.iter().position(|w| w == *v).unwrap()] != 0) {
        return Err(ResolveError::UnsupportedCenter(format!(
            "{v} ≠ 0 at {} while p = {}",
            fmt_point(&pt),
            chart.relation_poly().unwrap()
        )));
    }
    let vars = &chart.vars;
    let translate: BTreeMap<String, MultiPoly> = vars
        .iter()
        .zip(point)
        .map(|(v, &a)| (v.clone(), &MultiPoly::var(vars, v) + &MultiPoly::constant(vars, rat(a))))
        .collect();
    let f = chart.generators[0].align_to(vars).substitute_some(&translate).align_to(vars);
    let letter = fresh_letter(vars);
    let case_a = chart.relation.is_none();
    let ncen = if case_a { n + 1 } else { n };
    let fresh: Vec<String> = (0..ncen).map(|i| format!("{letter}{i}")).collect();
    let mut cen_names = vars.clone();
    if case_a {
        cen_names.push("p".into());
    }

    // Terms as (exponents over center generators, unit coefficient).
    let mut terms: Vec<(Vec<u32>, Rat)> = Vec::new();
    let f = if case_a { f } else { p_free(&f, &chart.relation_poly().unwrap(), p)? };
    for (m, c) in f.terms() {
        let (j, u) = split_p(c, p)?;
        let mut e = m.clone();
        if case_a {
            e.push(j);
        } else if j > 0 {
            return Err(ResolveError::Invalid(format!("{f} is not p-free")));
        }
        terms.push((e, u));
    }
    let ord = terms.iter().map(|(e, _)| e.iter().sum::<u32>()).min().unwrap_or(0);
    let mut initial = FpPoly::zero(p.get(), &cen_names);
    for (e, u) in &terms {
        if e.iter().sum::<u32>() == ord {
            let single = MultiPoly::from_terms(&cen_names, [(e.clone(), u.clone())]);
            initial = initial.add(&FpPoly::from_multi(&single, p)?);
        }
    }
    let factors = initial.irreducible_factors()?;
    let fp = |name: &str, target: &[String]| FpPoly::var(p.get(), target, name);

    let mut charts = Vec::new();
    let mut exceptional = Vec::new();
    let mut dehomogenized = Vec::new();
    let parent_one = MultiPoly::int(vars, 1);
    for k in 0..ncen {
        let p_chart = case_a && k == n;
        let cvars: Vec<String> = if p_chart {
            fresh[..n].to_vec()
        } else {
            let mut cv: Vec<String> = (0..n).map(|i| if i == k { vars[k].clone() } else { fresh[i].clone() }).collect();
            if case_a {
                cv.push(fresh[n].clone());
            }
            cv
        };
        let vk = if p_chart { None } else { Some(vars[k].clone()) };
        let scale_var = |i: usize| -> MultiPoly {
            match &vk {
                None => MultiPoly::var(&cvars, &fresh[i]).scale(&p.as_rat()),
                Some(v) if i == k => MultiPoly::var(&cvars, v),
                Some(v) => &MultiPoly::var(&cvars, v) * &MultiPoly::var(&cvars, &fresh[i]),
            }
        };
        let forward: BTreeMap<String, MultiPoly> = (0..n)
            .map(|i| (vars[i].clone(), &scale_var(i) + &MultiPoly::constant(&cvars, rat(point[i]))))
            .collect();
        let shifted = |i: usize| -> MultiPoly {
            &MultiPoly::var(vars, &vars[i]) - &MultiPoly::constant(vars, rat(point[i]))
        };

        // Strict transform.
        let mut h = MultiPoly::zero(&cvars);
        for (e, u) in &terms {
            let deg: u32 = e.iter().sum();
            let mut exps: BTreeMap<&str, u32> = BTreeMap::new();
            match &vk {
                None => {
                    for i in 0..n {
                        exps.insert(&fresh[i], e[i]);
                    }
                    let c = u * num_traits::pow(p.as_rat(), (deg - ord) as usize);
                    h = &h + &monomial(&cvars, &exps, c);
                }
                Some(v) => {
                    exps.insert(v, deg - ord);
                    for i in 0..n {
                        if i != k {
                            exps.insert(&fresh[i], e[i]);
                        }
                    }
                    if case_a {
                        exps.insert(&fresh[n], e[n]);
                    }
                    h = &h + &monomial(&cvars, &exps, u.clone());
                }
            }
        }

        let relation = match (&vk, &chart.relation) {
            (None, _) => None,
            (Some(v), None) => Some(BTreeMap::from([(v.clone(), 1), (fresh[n].clone(), 1)])),
            (Some(v), Some(rel)) => {
                let total: u32 = rel.values().sum();
                let mut r = BTreeMap::new();
                r.insert(v.clone(), total);
                for (w, a) in rel {
                    let i = vars.iter().position(|x| x == w).unwrap();
                    if i != k {
                        r.insert(fresh[i].clone(), *a);
                    }
                }
                Some(r)
            }
        };

        let mut inverse: BTreeMap<String, (MultiPoly, MultiPoly)> = BTreeMap::new();
        match &vk {
            None => {
                for i in 0..n {
                    inverse.insert(fresh[i].clone(), (shifted(i), MultiPoly::constant(vars, p.as_rat())));
                }
            }
            Some(v) => {
                inverse.insert(v.clone(), (shifted(k), parent_one.clone()));
                for i in 0..n {
                    if i != k {
                        inverse.insert(fresh[i].clone(), (shifted(i), shifted(k)));
                    }
                }
                if case_a {
                    inverse.insert(fresh[n].clone(), (MultiPoly::constant(vars, p.as_rat()), shifted(k)));
                }
            }
        }

        // Direction coordinates on the exceptional locus and dehomogenization.
        let one = MultiPoly::int(&cvars, 1);
        let mut direction = Vec::new();
        let mut dehom: BTreeMap<String, FpPoly> = BTreeMap::new();
        for (i, name) in cen_names.iter().enumerate() {
            if i == k {
                direction.push(one.clone());
                dehom.insert(name.clone(), FpPoly::constant(p.get(), &cvars, 1));
            } else {
                direction.push(MultiPoly::var(&cvars, &fresh[i]));
                dehom.insert(name.clone(), fp(&fresh[i], &cvars));
            }
        }
        dehomogenized.push(factors.iter().map(|g| g.substitute(&dehom, &cvars)).collect());
        exceptional.push(match &vk {
            None => FiberEq::P,
            Some(v) => FiberEq::Var(v.clone()),
        });

        let name = format!("{}.{}", chart.name, vk.as_deref().unwrap_or("p"));
        charts.push(AffineChart {
            id: 0,
            name,
            vars: cvars.clone(),
            relation,
            generators: vec![h],
            divisors: Vec::new(),
            map: Some(ChartMap {
                parent: chart.id,
                step: 0,
                forward,
                inverse,
                center: Some(Center {
                    point: point.to_vec(),
                    direction,
                }),
            }),
        });
    }
    Ok(BlowupOutcome {
        charts,
        initial_form: initial,
        factors,
        exceptional,
        dehomogenized,
    })
}
