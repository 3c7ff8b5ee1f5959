//! Matching exceptional components with valuations of K(x), and models
//! viewed as finite sets of valuations.

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::arith::{ExtVal, Prime, Rat};
use crate::poly::{PolyError, RatFunc, UniPoly};
use crate::resolve::{AffineChart, ResolutionState};
use crate::valuation::{InductiveValuation, ValuationError};
use crate::wildquot::{chart_generators, model_valuation, WildQuotData, WildQuotError, SCHEMA};


#[derive(Debug, Error)]
pub enum AposterioriError {
    #[error("a model needs at least one valuation")]
    Empty,
    #[error("valuations over different primes")]
    MixedPrimes,
    #[error("valuations {0} and {1} agree on every witness")]
    Indistinguishable(usize, usize),
    #[error("no divisor labeled {0} on chart {1}")]
    UnknownDivisor(String, String),
    #[error("coordinate map has no image for `{0}`")]
    MissingCoordinate(String),
    #[error("{0}")]
    Unsupported(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
    #[error(transparent)]
    WildQuot(#[from] WildQuotError),
}

/// A model of the curve as the set of valuations of its special-fiber components.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    names: Vec<String>,
    members: Vec<InductiveValuation>,
    witnesses: BTreeMap<(usize, usize), UniPoly>,
}

fn x_poly() -> UniPoly {
    UniPoly::from_ints("x", &[0, 1])
}

/// `x`, every key polynomial of the members, `x²` and `x + p`.
fn default_witnesses(vals: &[&InductiveValuation]) -> Vec<UniPoly> {
    let mut out = vec![x_poly()];
    for v in vals {
        for s in v.steps() {
            if !out.contains(&s.phi) {
                out.push(s.phi.clone());
            }
        }
    }
    let sq = x_poly().pow(2);
    if !out.contains(&sq) {
        out.push(sq);
    }
    if let Some(v) = vals.first() {
        let shift = UniPoly::new("x", vec![v.prime().as_rat(), Rat::from_integer(1.into())]);
        if !out.contains(&shift) {
            out.push(shift);
        }
    }
    out
}

fn witness_for(a: &InductiveValuation, b: &InductiveValuation, candidates: &[UniPoly]) -> Option<UniPoly> {
    candidates
        .iter()
        .find(|f| a.evaluate(f) != b.evaluate(f))
        .cloned()
}

impl ModelSpec {
    pub fn new(members: Vec<InductiveValuation>) -> Result<Self, AposterioriError> {
        let names = (0..members.len()).map(|i| format!("v{i}")).collect();
        Self::named(names, members)
    }

    pub fn named(names: Vec<String>, members: Vec<InductiveValuation>) -> Result<Self, AposterioriError> {
        let first = members.first().ok_or(AposterioriError::Empty)?;
        if members.iter().any(|v| v.prime() != first.prime()) {
            return Err(AposterioriError::MixedPrimes);
        }
        let refs: Vec<&InductiveValuation> = members.iter().collect();
        let candidates = default_witnesses(&refs);
        let mut witnesses = BTreeMap::new();
        for i in 0..members.len() {
            for j in i + 1..members.len() {
                let w = witness_for(&members[i], &members[j], &candidates)
                    .ok_or(AposterioriError::Indistinguishable(i, j))?;
                witnesses.insert((i, j), w);
            }
        }
        Ok(ModelSpec { names, members, witnesses })
    }

    pub fn prime(&self) -> Prime {
        self.members[0].prime()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[InductiveValuation] {
        &self.members
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<&InductiveValuation> {
        self.names.iter().position(|n| n == name).map(|i| &self.members[i])
    }

    /// Witness separating members `i` and `j`.
    pub fn witness(&self, i: usize, j: usize) -> Option<&UniPoly> {
        self.witnesses.get(&(i.min(j), i.max(j)))
    }

    pub fn witnesses(&self) -> impl Iterator<Item = (&(usize, usize), &UniPoly)> {
        self.witnesses.iter()
    }
}

/// The seven valuations of the resolved example, `v0 … v6` in component order.
pub fn example_valuations() -> ModelSpec {
    let data = WildQuotData::example();
    let p = data.p();
    let q = |n: i64, d: i64| Rat::new(n.into(), d.into());
    let x = x_poly();
    let v0 = InductiveValuation::gauss(p);
    let along_x = |r: Rat| v0.augment(&x, r).expect("x is a key for the Gauss valuation");
    let v5 = along_x(q(1, 3));
    let along_phi = |s: Rat| v5.augment(data.phi(), s).expect("φ is a key over v(x) = 1/3");
    let members = vec![
        v0.clone(),
        along_x(q(1, 1)),
        along_phi(q(5, 3)),
        along_x(q(1, 2)),
        along_phi(q(4, 3)),
        v5.clone(),
        model_valuation(&data).expect("example data is valid"),
    ];
    ModelSpec::new(members).expect("the seven valuations are distinct")
}

/// True when every member of `a` is a member of `b`, deciding equality of
/// valuations by their values on the recorded and default witnesses.
pub fn model_spec_subset(a: &ModelSpec, b: &ModelSpec) -> Result<bool, AposterioriError> {
    if a.prime() != b.prime() {
        return Err(AposterioriError::MixedPrimes);
    }
    let all: Vec<&InductiveValuation> = a.members.iter().chain(&b.members).collect();
    let mut samples = default_witnesses(&all);
    for w in a.witnesses.values().chain(b.witnesses.values()) {
        if !samples.contains(w) {
            samples.push(w.clone());
        }
    }
    Ok(a.members.iter().all(|v| {
        b.members
            .iter()
            .any(|w| v.compare_on(w, &samples).iter().all(|(x, y)| x == y))
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatchReport {
    pub label: String,
    pub valuation: String,
    pub equations: Vec<(String, ExtVal)>,
    pub variables: Vec<(String, ExtVal)>,
    /// A chart variable whose residue is not a constant of F_p.
    pub unit_parameter: Option<String>,
    pub matched: bool,
}

/// Tests whether the prime divisor `label` of `chart` has valuation `v`:
/// its local equations have positive value, the chart's coordinates are
/// integral, and some coordinate reduces to a non-constant unit.
pub fn match_divisor_valuation(
    chart: &AffineChart,
    label: &str,
    v: &InductiveValuation,
    coord_map: &BTreeMap<String, RatFunc>,
) -> Result<MatchReport, AposterioriError> {
    let record = chart
        .divisors
        .iter()
        .find(|d| d.label == label)
        .ok_or_else(|| AposterioriError::UnknownDivisor(label.into(), chart.name.clone()))?;
    for var in &chart.vars {
        if !coord_map.contains_key(var) {
            return Err(AposterioriError::MissingCoordinate(var.clone()));
        }
    }
    let mut equations = Vec::new();
    for e in &record.equations {
        let f = e.eval_ratfunc("x", coord_map)?;
        equations.push((e.to_string(), v.evaluate_rat(&f)));
    }
    let p = v.prime().get();
    let mut variables = Vec::new();
    let mut unit_parameter = None;
    for var in &chart.vars {
        let f = &coord_map[var];
        let val = v.evaluate_rat(f);
        if unit_parameter.is_none() && val == ExtVal::zero() {
            let transcendental = (1..p).all(|c| {
                let shifted = f - &RatFunc::constant("x", Rat::from_integer(c.into()));
                v.evaluate_rat(&shifted) == ExtVal::zero()
            });
            if transcendental {
                unit_parameter = Some(var.clone());
            }
        }
        variables.push((var.clone(), val));
    }
    let positive = equations.iter().all(|(_, e)| *e > ExtVal::zero());
    let integral = variables.iter().all(|(_, e)| *e >= ExtVal::zero());
    Ok(MatchReport {
        label: label.into(),
        valuation: v.to_string(),
        matched: positive && integral && unit_parameter.is_some(),
        equations,
        variables,
        unit_parameter,
    })
}

/// Every chart variable as a rational function of `x`, composed through the chart maps.
pub fn coord_maps(state: &ResolutionState) -> Result<Vec<BTreeMap<String, RatFunc>>, AposterioriError> {
    let gens = chart_generators(state.data());
    let mut out: Vec<BTreeMap<String, RatFunc>> = Vec::new();
    for chart in state.charts() {
        let map = match &chart.map {
            None => chart.vars.iter().cloned().zip(gens.iter().cloned()).collect(),
            Some(m) => {
                let parent = &out[m.parent];
                let mut here = BTreeMap::new();
                for var in &chart.vars {
                    let (num, den) = m
                        .inverse
                        .get(var)
                        .ok_or_else(|| AposterioriError::MissingCoordinate(var.clone()))?;
                    let f = num.eval_ratfunc("x", parent)?.div(&den.eval_ratfunc("x", parent)?)?;
                    here.insert(var.clone(), f);
                }
                here
            }
        };
        out.push(map);
    }
    Ok(out)
}

/// Valuations certified for one component of the terminal state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentMatch {
    pub label: String,
    pub chart_multiplicity: Option<u32>,
    pub valuations: Vec<String>,
}

/// Matches every special-fiber component against every member of `spec`,
/// accepting a pair when some leaf chart certifies it.
pub fn match_components(
    state: &ResolutionState,
    spec: &ModelSpec,
) -> Result<Vec<ComponentMatch>, AposterioriError> {
    let maps = coord_maps(state)?;
    let graph_labels = display_labels(state);
    let mut out = Vec::new();
    for (internal, shown) in graph_labels {
        let mut found = Vec::new();
        for (name, v) in spec.names.iter().zip(&spec.members) {
            let mut ok = false;
            for leaf in state.leaves() {
                if leaf.divisors.iter().any(|d| d.label == internal)
                    && match_divisor_valuation(leaf, &internal, v, &maps[leaf.id])?.matched
                {
                    ok = true;
                    break;
                }
            }
            if ok {
                found.push(name.clone());
            }
        }
        out.push(ComponentMatch {
            label: shown,
            chart_multiplicity: state.divisor(&internal).and_then(|d| d.multiplicity),
            valuations: found,
        });
    }
    Ok(out)
}

/// `(internal label, displayed label)` with exceptional components first.
fn display_labels(state: &ResolutionState) -> Vec<(String, String)> {
    let n_exc = state.registry().iter().filter(|d| d.exceptional).count();
    let mut out: Vec<(String, String)> = state
        .registry()
        .iter()
        .filter(|d| d.exceptional)
        .map(|d| (d.label.clone(), d.label.clone()))
        .collect();
    out.sort_by_key(|(l, _)| l[1..].parse::<usize>().unwrap_or(usize::MAX));
    for d in state.registry().iter().filter(|d| !d.exceptional) {
        out.push((d.label.clone(), format!("C{n_exc}")));
    }
    out
}

/// True when every component has exactly one valuation and no valuation is used twice.
pub fn is_bijection(matches: &[ComponentMatch], spec: &ModelSpec) -> bool {
    let mut used: Vec<&String> = Vec::new();
    for m in matches {
        if m.valuations.len() != 1 || used.contains(&&m.valuations[0]) {
            return false;
        }
        used.push(&m.valuations[0]);
    }
    used.len() == spec.len()
}

/// Component label, matched valuation, and its ramification index, as JSON.
pub fn valuation_table(state: &ResolutionState, spec: &ModelSpec) -> Result<serde_json::Value, AposterioriError> {
    let matches = match_components(state, spec)?;
    let rows: Vec<serde_json::Value> = matches
        .iter()
        .map(|m| {
            let vals: Vec<serde_json::Value> = m
                .valuations
                .iter()
                .map(|name| {
                    let v = spec.get(name).unwrap();
                    json!({
                        "name": name,
                        "valuation": v.to_string(),
                        "multiplicity": v.ramification_index(),
                    })
                })
                .collect();
            json!({
                "label": m.label,
                "chart_multiplicity": m.chart_multiplicity,
                "valuations": vals,
            })
        })
        .collect();
    Ok(json!({
        "schema": SCHEMA,
        "p": state.p().get(),
        "bijection": is_bijection(&matches, spec),
        "components": rows,
    }))
}
