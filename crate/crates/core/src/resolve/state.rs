use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::chart::{fmt_point, AffineChart, DivisorRecord, LocalCurve};
use super::ops::{blowup, eliminate_linear, root_chart, tjurina_transform, BlowupOutcome};
use super::points::{coords_of, generated_degree, FieldEval};
use super::ResolveError;
use crate::arith::{FFElem, FiniteField, Prime};
use crate::graph::DualGraph;
use crate::poly::MultiPoly;
use crate::wildquot::{presentation_matrix, ChartPresentation, WildQuotData, SCHEMA};

pub const DEFAULT_BLOWUP_CAP: usize = 12;

/// Internal label of the strict transform of the original special fiber.
const SPECIAL: &str = "S";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Tjurina,
    Eliminate,
    Blowup,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogStep {
    pub kind: StepKind,
    pub chart: usize,
    pub center: Option<Vec<u64>>,
    pub charts_created: Vec<usize>,
    pub divisors_born: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DivisorInfo {
    pub label: String,
    pub multiplicity: Option<u32>,
    pub birth_step: usize,
    pub center_dim: u32,
    pub exceptional: bool,
}

/// Chart-independent name of a point: its image on the original chart plus,
/// for every blown-up center it lies over, the normalized direction there.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PointId {
    pub degree: usize,
    pub root: Vec<Vec<u64>>,
    pub over: Vec<(usize, Vec<Vec<u64>>)>,
}

#[derive(Debug, Clone)]
pub struct ResolutionState {
    data: WildQuotData,
    pres: ChartPresentation,
    k_max: usize,
    charts: Vec<AffineChart>,
    leaves: Vec<usize>,
    registry: Vec<DivisorInfo>,
    log: Vec<LogStep>,
    excluded: Vec<PointId>,
}

enum Origin {
    Exceptional(usize),
    Old(String),
}

impl ResolutionState {
    pub fn new(data: &WildQuotData, k_max: usize) -> Result<Self, ResolveError> {
        if k_max == 0 || k_max > crate::arith::MAX_EXTENSION_DEGREE {
            return Err(ResolveError::KMaxTooLarge(k_max));
        }
        let pres = presentation_matrix(data)?;
        Ok(ResolutionState {
            data: data.clone(),
            charts: vec![root_chart(&pres)],
            pres,
            k_max,
            leaves: vec![0],
            registry: Vec::new(),
            log: Vec::new(),
            excluded: Vec::new(),
        })
    }

    pub fn p(&self) -> Prime {
        self.data.p()
    }

    pub fn data(&self) -> &WildQuotData {
        &self.data
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn charts(&self) -> &[AffineChart] {
        &self.charts
    }

    pub fn chart(&self, id: usize) -> &AffineChart {
        &self.charts[id]
    }

    pub fn leaves(&self) -> impl Iterator<Item = &AffineChart> {
        self.leaves.iter().map(|&i| &self.charts[i])
    }

    pub fn registry(&self) -> &[DivisorInfo] {
        &self.registry
    }

    pub fn divisor(&self, label: &str) -> Option<&DivisorInfo> {
        self.registry.iter().find(|d| d.label == label)
    }

    pub fn log(&self) -> &[LogStep] {
        &self.log
    }

    pub fn blowup_count(&self) -> usize {
        self.log.iter().filter(|s| s.kind == StepKind::Blowup).count()
    }

    fn exceptional_count(&self) -> usize {
        self.registry.iter().filter(|d| d.exceptional).count()
    }

    fn push_chart(&mut self, mut chart: AffineChart, step: usize) -> usize {
        let id = self.charts.len();
        chart.id = id;
        if let Some(map) = chart.map.as_mut() {
            map.step = step;
        }
        self.charts.push(chart);
        id
    }

    fn replace_leaf(&mut self, old: usize, new: &[usize]) {
        self.leaves.retain(|&l| l != old);
        self.leaves.extend_from_slice(new);
    }

    fn set_multiplicity(&mut self, label: &str, m: u32) -> Result<(), ResolveError> {
        let info = self
            .registry
            .iter_mut()
            .find(|d| d.label == label)
            .ok_or_else(|| ResolveError::Invalid(format!("unknown divisor {label}")))?;
        match info.multiplicity {
            Some(old) if old != m => Err(ResolveError::Invalid(format!(
                "{label} has multiplicity {old} and {m} in different charts"
            ))),
            _ => {
                info.multiplicity = Some(m);
                Ok(())
            }
        }
    }

    /// Replaces the root chart by the two affine charts of its Tjurina modification.
    pub fn tjurina(&mut self) -> Result<(), ResolveError> {
        if !self.log.is_empty() {
            return Err(ResolveError::Invalid("Tjurina modification must come first".into()));
        }
        let step = self.log.len();
        let charts = tjurina_transform(&self.pres, self.p())?;
        let ids: Vec<usize> = charts.into_iter().map(|c| self.push_chart(c, step)).collect();
        self.replace_leaf(0, &ids);
        self.registry.push(DivisorInfo {
            label: "C0".into(),
            multiplicity: None,
            birth_step: step,
            center_dim: 0,
            exceptional: true,
        });
        self.log.push(LogStep {
            kind: StepKind::Tjurina,
            chart: 0,
            center: Some(vec![0; self.pres.variables.len()]),
            charts_created: ids,
            divisors_born: vec!["C0".into()],
        });
        Ok(())
    }

    /// Reduces a leaf chart to a hypersurface and identifies its fiber components.
    pub fn eliminate(&mut self, chart_id: usize) -> Result<(), ResolveError> {
        self.check_leaf(chart_id)?;
        let p = self.p();
        let step = self.log.len();
        let mut chart = eliminate_linear(&self.charts[chart_id], p)?;
        let mut records = Vec::new();
        let mut born = Vec::new();
        for (curve, m) in chart.fiber_curves(p)? {
            let mut hits = Vec::new();
            for d in &chart.divisors {
                let mut all = true;
                for e in &d.equations {
                    all &= curve.contains_zero_set_of(e, p)?;
                }
                if all {
                    hits.push(d);
                }
            }
            let record = match hits.as_slice() {
                [d] => DivisorRecord {
                    curve: Some(curve.clone()),
                    ..(*d).clone()
                },
                [] => {
                    if records.iter().any(|r: &DivisorRecord| r.label == SPECIAL) {
                        return Err(ResolveError::Invalid(format!(
                            "special fiber of {} is reducible",
                            chart.name
                        )));
                    }
                    if self.divisor(SPECIAL).is_none() {
                        self.registry.push(DivisorInfo {
                            label: SPECIAL.into(),
                            multiplicity: None,
                            birth_step: step,
                            center_dim: 1,
                            exceptional: false,
                        });
                        born.push(SPECIAL.to_string());
                    }
                    DivisorRecord {
                        label: SPECIAL.into(),
                        equations: curve.equations(p),
                        birth_step: self.divisor(SPECIAL).unwrap().birth_step,
                        center_dim: 1,
                        curve: Some(curve.clone()),
                    }
                }
                _ => {
                    return Err(ResolveError::Invalid(format!(
                        "curve {curve} matches several divisors"
                    )))
                }
            };
            self.set_multiplicity(&record.label, m)?;
            records.push(record);
        }
        chart.divisors = records;
        let id = self.push_chart(chart, step);
        self.replace_leaf(chart_id, &[id]);
        self.log.push(LogStep {
            kind: StepKind::Eliminate,
            chart: chart_id,
            center: None,
            charts_created: vec![id],
            divisors_born: born,
        });
        Ok(())
    }

    fn check_leaf(&self, chart_id: usize) -> Result<(), ResolveError> {
        if self.leaves.contains(&chart_id) {
            Ok(())
        } else {
            Err(ResolveError::Invalid(format!("chart {chart_id} is not a leaf")))
        }
    }

    /// Blows up an F_p-rational special-fiber point of a leaf chart.
    pub fn blowup_at(&mut self, chart_id: usize, point: &[u64]) -> Result<(), ResolveError> {
        self.check_leaf(chart_id)?;
        let p = self.p();
        let step = self.log.len();
        let parent = self.charts[chart_id].clone();
        let field = FiniteField::prime_field(p);
        let pt: Vec<FFElem> = point.iter().map(|&a| field.from_u64(a % p.get())).collect();
        let BlowupOutcome {
            charts,
            factors,
            exceptional,
            dehomogenized,
            ..
        } = blowup(&parent, p, point)?;
        let id = self.point_id(chart_id, &pt);

        let parent_curves: Vec<(String, Vec<MultiPoly>)> = parent
            .divisors
            .iter()
            .filter_map(|d| d.curve.as_ref().map(|c| (d.label.clone(), c.equations(p))))
            .collect();
        let mut found: Vec<Vec<(LocalCurve, u32, Origin)>> = Vec::new();
        let mut exc_mult: Vec<Option<u32>> = vec![None; factors.len()];
        for (ci, child) in charts.iter().enumerate() {
            let forward = &child.map.as_ref().unwrap().forward;
            let mut here = Vec::new();
            for (curve, m) in child.fiber_curves(p)? {
                let inside = match &exceptional[ci] {
                    super::FiberEq::P => true,
                    super::FiberEq::Var(v) => curve.inside(v),
                };
                let origin = if inside {
                    let mut hits = Vec::new();
                    for (j, d) in dehomogenized[ci].iter().enumerate() {
                        if !d.is_constant() && curve.contains_zero_set_of(&d.to_multi(), p)? {
                            hits.push(j);
                        }
                    }
                    match hits.as_slice() {
                        [j] => {
                            if exc_mult[*j].is_some_and(|old| old != m) {
                                return Err(ResolveError::Invalid(format!(
                                    "inconsistent multiplicity for exceptional factor {}",
                                    factors[*j]
                                )));
                            }
                            exc_mult[*j] = Some(m);
                            Origin::Exceptional(*j)
                        }
                        _ => {
                            return Err(ResolveError::Invalid(format!(
                                "cannot match exceptional curve {curve} in {}",
                                child.name
                            )))
                        }
                    }
                } else {
                    let mut hits = Vec::new();
                    for (label, eqs) in &parent_curves {
                        let mut all = true;
                        for e in eqs {
                            let pulled = e.substitute_some(forward).align_to(&child.vars);
                            all &= curve.contains_zero_set_of(&pulled, p)?;
                        }
                        if all {
                            hits.push(label.clone());
                        }
                    }
                    match hits.as_slice() {
                        [label] => Origin::Old(label.clone()),
                        _ => {
                            return Err(ResolveError::Invalid(format!(
                                "curve {curve} in {} has {} candidate parents",
                                child.name,
                                hits.len()
                            )))
                        }
                    }
                };
                here.push((curve, m, origin));
            }
            found.push(here);
        }

        let mut order: Vec<usize> = (0..factors.len()).collect();
        for (j, m) in exc_mult.iter().enumerate() {
            if m.is_none() {
                return Err(ResolveError::Invalid(format!(
                    "exceptional factor {} is visible in no chart",
                    factors[j]
                )));
            }
        }
        order.sort_by_key(|&j| (exc_mult[j], j));
        let base = self.exceptional_count();
        let mut labels = vec![String::new(); factors.len()];
        for (rank, &j) in order.iter().enumerate() {
            labels[j] = format!("C{}", base + rank);
        }
        let mut born = Vec::new();
        for &j in &order {
            self.registry.push(DivisorInfo {
                label: labels[j].clone(),
                multiplicity: exc_mult[j],
                birth_step: step,
                center_dim: 0,
                exceptional: true,
            });
            born.push(labels[j].clone());
        }

        let mut ids = Vec::new();
        for (mut child, here) in charts.into_iter().zip(found) {
            let mut records = Vec::new();
            for (curve, m, origin) in here {
                let label = match origin {
                    Origin::Exceptional(j) => labels[j].clone(),
                    Origin::Old(l) => l,
                };
                self.set_multiplicity(&label, m)?;
                let info = self.divisor(&label).unwrap();
                records.push(DivisorRecord {
                    label,
                    equations: curve.equations(p),
                    birth_step: info.birth_step,
                    center_dim: info.center_dim,
                    curve: Some(curve),
                });
            }
            records.sort_by_key(|r| label_key(&r.label));
            child.divisors = records;
            ids.push(self.push_chart(child, step));
        }
        self.replace_leaf(chart_id, &ids);
        self.excluded.push(id);
        self.log.push(LogStep {
            kind: StepKind::Blowup,
            chart: chart_id,
            center: Some(point.to_vec()),
            charts_created: ids,
            divisors_born: born,
        });
        Ok(())
    }

    /// Identity of a point of chart `chart_id` that does not depend on the chart.
    pub fn point_id(&self, chart_id: usize, pt: &[FFElem]) -> PointId {
        let field = pt[0].field().clone();
        let fe = FieldEval(field.clone());
        let mut over = Vec::new();
        let mut cur = chart_id;
        let mut coords = pt.to_vec();
        while let Some(map) = &self.charts[cur].map {
            let child_vars = &self.charts[cur].vars;
            let parent = &self.charts[map.parent];
            let img: Vec<FFElem> = parent
                .vars
                .iter()
                .map(|v| map.forward[v].align_to(child_vars).evaluate(&fe, &coords))
                .collect();
            if let Some(center) = &map.center {
                let at_center = img
                    .iter()
                    .zip(&center.point)
                    .all(|(a, &c)| a.as_prime_field() == Some(c));
                if at_center {
                    let dir: Vec<FFElem> = center
                        .direction
                        .iter()
                        .map(|d| d.align_to(child_vars).evaluate(&fe, &coords))
                        .collect();
                    over.push((map.step, coords_of(&normalize(dir))));
                }
            }
            coords = img;
            cur = map.parent;
        }
        over.reverse();
        PointId {
            degree: generated_degree(pt),
            root: coords_of(&coords),
            over,
        }
    }

    fn is_excluded(&self, chart_id: usize, pt: &[FFElem]) -> bool {
        let id = self.point_id(chart_id, pt);
        self.excluded.contains(&id)
    }

    /// Special-fiber points of a leaf that are not blown-up centers.
    pub fn live_points(&self, chart_id: usize) -> Result<Vec<Vec<FFElem>>, ResolveError> {
        let chart = &self.charts[chart_id];
        Ok(chart
            .special_fiber_points(self.p(), self.k_max)?
            .into_iter()
            .filter(|pt| !self.is_excluded(chart_id, pt))
            .collect())
    }

    /// First singular point, scanning leaves in creation order and points lexicographically.
    pub fn first_singular_point(&self) -> Result<Option<(usize, Vec<FFElem>)>, ResolveError> {
        for &leaf in &self.leaves {
            for pt in self.live_points(leaf)? {
                if !self.charts[leaf].is_regular_at(self.p(), &pt)? {
                    return Ok(Some((leaf, pt)));
                }
            }
        }
        Ok(None)
    }

    /// First regular point where the fiber components fail to cross normally.
    pub fn first_non_snc_point(&self) -> Result<Option<(usize, Vec<FFElem>)>, ResolveError> {
        for &leaf in &self.leaves {
            for pt in self.live_points(leaf)? {
                if !self.charts[leaf].snc_at(self.p(), &pt)?.snc {
                    return Ok(Some((leaf, pt)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_terminal(&self) -> Result<bool, ResolveError> {
        if self.leaves.iter().any(|&l| !self.charts[l].is_hypersurface()) {
            return Ok(false);
        }
        Ok(self.first_singular_point()?.is_none() && self.first_non_snc_point()?.is_none())
    }

    fn rational_center(pt: &[FFElem]) -> Result<Vec<u64>, ResolveError> {
        pt.iter()
            .map(|a| a.as_prime_field())
            .collect::<Option<Vec<u64>>>()
            .ok_or_else(|| ResolveError::UnsupportedCenter(format!("{} is not F_p-rational", fmt_point(pt))))
    }

    /// Runs the blow-up loop until the special fiber is regular with normal crossings.
    pub fn run(&mut self, cap: usize) -> Result<(), ResolveError> {
        if self.log.is_empty() {
            self.tjurina()?;
        }
        for leaf in self.leaves.clone() {
            if !self.charts[leaf].is_hypersurface() {
                self.eliminate(leaf)?;
            }
        }
        loop {
            let target = match self.first_singular_point()? {
                Some(t) => Some(t),
                None => self.first_non_snc_point()?,
            };
            let Some((chart, pt)) = target else {
                return Ok(());
            };
            if self.blowup_count() >= cap {
                return Err(ResolveError::IterationCap(self.dump(Some((chart, &pt)))));
            }
            let center = Self::rational_center(&pt)?;
            self.blowup_at(chart, &center)?;
        }
    }

    /// Human-readable summary of the log and the current leaves.
    pub fn dump(&self, pending: Option<(usize, &[FFElem])>) -> String {
        let mut s = String::new();
        for (i, step) in self.log.iter().enumerate() {
            let center = match &step.center {
                Some(c) => format!(" at {c:?}"),
                None => String::new(),
            };
            let _ = writeln!(
                s,
                "step {i}: {:?} on chart {}{center} -> charts {:?}, new {:?}",
                step.kind, step.chart, step.charts_created, step.divisors_born
            );
        }
        for chart in self.leaves() {
            let rel = chart.relation_string(self.p()).unwrap_or_default();
            let gens: Vec<String> = chart.generators.iter().map(ToString::to_string).collect();
            let _ = writeln!(s, "chart {} [{}] {} {}", chart.id, chart.name, rel, gens.join(", "));
        }
        if let Some((chart, pt)) = pending {
            let _ = writeln!(s, "pending center {} on chart {chart}", fmt_point(pt));
        }
        s
    }

    /// Re-executes a log from scratch, checking every step reproduces its record.
    pub fn replay(data: &WildQuotData, k_max: usize, log: &[LogStep]) -> Result<Self, ResolveError> {
        let mut st = ResolutionState::new(data, k_max)?;
        for (i, step) in log.iter().enumerate() {
            match step.kind {
                StepKind::Tjurina => st.tjurina()?,
                StepKind::Eliminate => st.eliminate(step.chart)?,
                StepKind::Blowup => {
                    let center = step.center.as_ref().ok_or(ResolveError::ReplayMismatch(i))?;
                    st.blowup_at(step.chart, center)?
                }
            }
            if st.log.last() != Some(step) {
                return Err(ResolveError::ReplayMismatch(i));
            }
        }
        Ok(st)
    }

    /// Rebuilds a state from the output of [`to_json`](Self::to_json) by replaying its steps.
    pub fn from_json(v: &serde_json::Value) -> Result<Self, ResolveError> {
        let bad = |what: &str| ResolveError::Invalid(format!("resolution JSON: bad or missing `{what}`"));
        if v.get("schema").and_then(|s| s.as_str()) != Some(SCHEMA) {
            return Err(bad("schema"));
        }
        let p = v.get("p").and_then(|x| x.as_u64()).ok_or_else(|| bad("p"))?;
        let p = Prime::new(p).map_err(|_| bad("p"))?;
        let phi = v.get("phi").and_then(|x| x.as_str()).ok_or_else(|| bad("phi"))?;
        let phi = crate::poly::parse::parse_uni(phi, "x")?;
        let m = v.get("m").and_then(|x| x.as_u64()).ok_or_else(|| bad("m"))?;
        let k_max = v.get("k_max").and_then(|x| x.as_u64()).ok_or_else(|| bad("k_max"))? as usize;
        let steps: Vec<LogStep> =
            serde_json::from_value(v.get("steps").cloned().ok_or_else(|| bad("steps"))?)
                .map_err(|_| bad("steps"))?;
        let data = WildQuotData::new(p, &phi, m)?;
        Self::replay(&data, k_max, &steps)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let p = self.p();
        let charts: Vec<serde_json::Value> = self
            .charts
            .iter()
            .map(|c| {
                json!({
                    "id": c.id,
                    "name": c.name,
                    "leaf": self.leaves.contains(&c.id),
                    "parent": c.map.as_ref().map(|m| m.parent),
                    "variables": c.vars,
                    "relation": c.relation_string(p),
                    "generators": c.generators.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "divisors": c.divisors.iter().map(|d| json!({
                        "label": display_label(self, &d.label),
                        "equations": d.equations.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    })).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "schema": SCHEMA,
            "p": p.get(),
            "phi": self.data.phi().to_string(),
            "m": self.data.m(),
            "k_max": self.k_max,
            "steps": self.log,
            "blowups": self.blowup_count(),
            "divisors": self.registry.iter().map(|d| json!({
                "label": display_label(self, &d.label),
                "multiplicity": d.multiplicity,
                "birth_step": d.birth_step,
                "center_dim": d.center_dim,
                "exceptional": d.exceptional,
            })).collect::<Vec<_>>(),
            "charts": charts,
        })
    }
}

fn display_label(st: &ResolutionState, label: &str) -> String {
    if label == SPECIAL {
        format!("C{}", st.exceptional_count())
    } else {
        label.to_string()
    }
}

fn label_key(l: &str) -> (bool, usize, String) {
    match l.strip_prefix('C').and_then(|n| n.parse().ok()) {
        Some(n) => (false, n, String::new()),
        None => (true, 0, l.to_string()),
    }
}

fn normalize(v: Vec<FFElem>) -> Vec<FFElem> {
    match v.iter().find(|a| !a.is_zero()) {
        None => v,
        Some(lead) => {
            let inv = lead.inv().expect("nonzero");
            v.iter().map(|a| a.mul(&inv).expect("same field")).collect()
        }
    }
}

/// Resolves with the given extension bound and blow-up cap.
pub fn resolve(data: &WildQuotData, k_max: usize, cap: usize) -> Result<ResolutionState, ResolveError> {
    let mut st = ResolutionState::new(data, k_max)?;
    st.run(cap)?;
    Ok(st)
}

/// The full pipeline with F_p points and the default cap.
pub fn resolve_example(data: &WildQuotData) -> Result<ResolutionState, ResolveError> {
    resolve(data, 1, DEFAULT_BLOWUP_CAP)
}

/// Dual graph of the special fiber of a finished resolution, without self-intersections.
pub fn dual_graph(state: &ResolutionState) -> Result<DualGraph, ResolveError> {
    let mut g = DualGraph::new();
    if state.registry.is_empty() {
        return Ok(g);
    }
    if !state.is_terminal()? {
        return Err(ResolveError::NonTerminal(state.dump(None)));
    }
    let mut ordered: Vec<&DivisorInfo> = state.registry.iter().collect();
    ordered.sort_by_key(|d| (!d.exceptional, label_key(&d.label)));
    let mut index = BTreeMap::new();
    for d in ordered {
        let m = d
            .multiplicity
            .ok_or_else(|| ResolveError::Invalid(format!("{} is visible in no chart", d.label)))?;
        index.insert(d.label.clone(), g.add_vertex(display_label(state, &d.label), m as u64));
    }
    let mut meets: BTreeMap<(usize, usize), BTreeSet<PointId>> = BTreeMap::new();
    for &leaf in &state.leaves {
        let chart = &state.charts[leaf];
        for pt in state.live_points(leaf)? {
            let through = chart.divisors_through(&pt);
            if through.len() == 2 {
                let (a, b) = (index[&through[0].label], index[&through[1].label]);
                let key = (a.min(b), a.max(b));
                meets.entry(key).or_default().insert(state.point_id(leaf, &pt));
            }
        }
    }
    for ((a, b), pts) in meets {
        g.add_edge(a, b, pts.len() as u64);
    }
    Ok(g)
}

