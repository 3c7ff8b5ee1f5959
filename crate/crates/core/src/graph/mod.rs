//! Dual graphs of resolutions: multiplicities, self-intersections from the
//! principal divisor of p, consistency checks, and the chain predictor.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{det, leading_principal_minors, Rat};
use crate::valuation::InductiveValuation;
use crate::wildquot::SCHEMA;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-intersection of {label} would be {value}, which is not an integer")]
    NonIntegral { label: String, value: String },
    #[error("vertex {0} has no self-intersection")]
    MissingSelfIntersection(String),
    #[error("p·m = {0} is too small for a prediction")]
    TooSmall(u64),
    #[error("invalid graph: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub label: String,
    pub multiplicity: u64,
    pub self_intersection: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

pub fn multiplicities_from_valuations(vs: &[InductiveValuation]) -> Vec<u64> {
    vs.iter().map(InductiveValuation::ramification_index).collect()
}

impl DualGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>, multiplicity: u64) -> usize {
        self.vertices.push(Vertex {
            label: label.into(),
            multiplicity,
            self_intersection: None,
        });
        self.vertices.len() - 1
    }

    /// Adds `weight` to the intersection number of `i` and `j`.
    pub fn add_edge(&mut self, i: usize, j: usize, weight: u64) {
        assert_ne!(i, j, "no self-loops");
        let (i, j) = (i.min(j), i.max(j));
        match self.edges.iter_mut().find(|e| e.i == i && e.j == j) {
            Some(e) => e.weight += weight,
            None => self.edges.push(Edge { i, j, weight }),
        }
        self.edges.sort_by_key(|e| (e.i, e.j));
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.label == label)
    }

    /// `(C_i · C_j)` for `i ≠ j`.
    pub fn intersection(&self, i: usize, j: usize) -> u64 {
        let (i, j) = (i.min(j), i.max(j));
        self.edges
            .iter()
            .find(|e| e.i == i && e.j == j)
            .map_or(0, |e| e.weight)
    }

    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.i == i {
                    Some(e.j)
                } else if e.j == i {
                    Some(e.i)
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors(i).len()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Checks the structural invariants: edges in range, no loops, positive multiplicities.
    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.vertices.len();
        if let Some(v) = self.vertices.iter().find(|v| v.multiplicity == 0) {
            return Err(GraphError::Invalid(format!("{} has multiplicity 0", v.label)));
        }
        for e in &self.edges {
            if e.i >= n || e.j >= n || e.i == e.j || e.weight == 0 {
                return Err(GraphError::Invalid(format!("bad edge {}-{}", e.i, e.j)));
            }
        }
        if !self.is_connected() {
            return Err(GraphError::Invalid("graph is not connected".into()));
        }
        Ok(())
    }

    /// Subgraph on the vertices whose labels are listed, in the given order.
    pub fn restrict(&self, labels: &[&str]) -> DualGraph {
        let idx: Vec<usize> = labels.iter().filter_map(|l| self.index_of(l)).collect();
        let mut g = DualGraph::new();
        for &i in &idx {
            g.vertices.push(self.vertices[i].clone());
        }
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate().skip(a + 1) {
                let w = self.intersection(i, j);
                if w > 0 {
                    g.add_edge(a, b, w);
                }
            }
        }
        g
    }

    /// The symmetric matrix `(C_i · C_j)`; needs every self-intersection.
    pub fn intersection_matrix(&self) -> Result<Vec<Vec<Rat>>, GraphError> {
        let n = self.vertices.len();
        let mut m = vec![vec![Rat::zero(); n]; n];
        for (i, v) in self.vertices.iter().enumerate() {
            let s = v
                .self_intersection
                .ok_or_else(|| GraphError::MissingSelfIntersection(v.label.clone()))?;
            m[i][i] = Rat::from_integer(s.into());
        }
        for e in &self.edges {
            m[e.i][e.j] = Rat::from_integer(e.weight.into());
            m[e.j][e.i] = Rat::from_integer(e.weight.into());
        }
        Ok(m)
    }

    /// Negative definiteness by Sylvester's criterion: `(−1)^k D_k > 0` for every leading minor.
    pub fn is_negative_definite(&self) -> Result<bool, GraphError> {
        let m = self.intersection_matrix()?;
        Ok(leading_principal_minors(&m)
            .iter()
            .enumerate()
            .all(|(k, d)| if k % 2 == 0 { d.is_negative() } else { d.is_positive() }))
    }

    pub fn determinant(&self) -> Result<Rat, GraphError> {
        Ok(det(&self.intersection_matrix()?))
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph G {\n");
        for v in &self.vertices {
            let own = v
                .self_intersection
                .map_or_else(|| "?".to_string(), |x| x.to_string());
            let _ = writeln!(
                s,
                "  \"{l}\" [label=\"{l} (m={m}, self={own})\", m={m}, self=\"{own}\"];",
                l = v.label,
                m = v.multiplicity,
            );
        }
        for e in &self.edges {
            let (a, b) = (&self.vertices[e.i].label, &self.vertices[e.j].label);
            if e.weight == 1 {
                let _ = writeln!(s, "  \"{a}\" -- \"{b}\";");
            } else {
                let _ = writeln!(s, "  \"{a}\" -- \"{b}\" [label=\"{}\"];", e.weight);
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "schema": SCHEMA,
            "vertices": self.vertices,
            "edges": self.edges,
        })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self, GraphError> {
        if v.get("schema").and_then(|s| s.as_str()) != Some(SCHEMA) {
            return Err(GraphError::Invalid("missing or unknown schema".into()));
        }
        let g: DualGraph =
            serde_json::from_value(v.clone()).map_err(|e| GraphError::Invalid(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }
}

/// `(C_i·C_i) = −Σ_{j≠i} m_j (C_i·C_j) / m_i` for a single vertex.
pub fn solve_self_intersection_at(g: &DualGraph, i: usize) -> Result<i64, GraphError> {
    let sum: u64 = g
        .neighbors(i)
        .into_iter()
        .map(|j| g.vertices[j].multiplicity * g.intersection(i, j))
        .sum();
    let mi = g.vertices[i].multiplicity;
    if sum % mi != 0 {
        return Err(GraphError::NonIntegral {
            label: g.vertices[i].label.clone(),
            value: format!("-{sum}/{mi}"),
        });
    }
    Ok(-((sum / mi) as i64))
}

/// Fills in every self-intersection.
pub fn solve_self_intersections(g: &DualGraph) -> Result<DualGraph, GraphError> {
    let mut out = g.clone();
    for i in 0..g.vertices.len() {
        out.vertices[i].self_intersection = Some(solve_self_intersection_at(g, i)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub label: String,
    pub sum: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub violations: Vec<Violation>,
}

impl ConsistencyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn failing_rows(&self) -> BTreeSet<usize> {
        self.violations.iter().map(|v| v.row).collect()
    }
}

/// Checks `Σ_j m_j (C_i·C_j) = 0` row by row; a missing diagonal is a violation.
pub fn check_graph_consistency(g: &DualGraph) -> ConsistencyReport {
    let mut violations = Vec::new();
    for (i, v) in g.vertices.iter().enumerate() {
        let Some(s) = v.self_intersection else {
            violations.push(Violation {
                row: i,
                label: v.label.clone(),
                sum: None,
            });
            continue;
        };
        let off: i64 = g
            .neighbors(i)
            .into_iter()
            .map(|j| (g.vertices[j].multiplicity * g.intersection(i, j)) as i64)
            .sum();
        let total = v.multiplicity as i64 * s + off;
        if total != 0 {
            violations.push(Violation {
                row: i,
                label: v.label.clone(),
                sum: Some(total),
            });
        }
    }
    ConsistencyReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prediction {
    pub graph: DualGraph,
    /// 1-based chain position carrying `C0`.
    pub attach_at: u64,
    /// Set when the chain has even length and the upper middle vertex was chosen.
    pub even_chain: bool,
}

/// Chain of `pm − 1` vertices with `C0` joined to the middle one. Multiplicities are
/// placeholders (all 1); only the shape is predicted.
pub fn predicted_graph(p: u64, m: u64) -> Result<Prediction, GraphError> {
    let n = p * m;
    if n < 2 {
        return Err(GraphError::TooSmall(n));
    }
    let len = n - 1;
    let attach_at = len.div_ceil(2);
    let mut g = DualGraph::new();
    for k in 1..=len {
        g.add_vertex(format!("A{k}"), 1);
    }
    for k in 1..len as usize {
        g.add_edge(k - 1, k, 1);
    }
    let c0 = g.add_vertex("C0", 1);
    g.add_edge(c0, attach_at as usize - 1, 1);
    Ok(Prediction {
        graph: g,
        attach_at,
        even_chain: len % 2 == 0,
    })
}

/// Graph isomorphism on the weighted edge structure, ignoring labels and multiplicities.
pub fn is_isomorphic(a: &DualGraph, b: &DualGraph) -> bool {
    find_isomorphism(a, b).is_some()
}

/// A vertex bijection `a → b` preserving edge weights, if one exists.
pub fn find_isomorphism(a: &DualGraph, b: &DualGraph) -> Option<Vec<usize>> {
    let n = a.vertices.len();
    if n != b.vertices.len() || a.edges.len() != b.edges.len() {
        return None;
    }
    let mut da: Vec<usize> = (0..n).map(|i| a.degree(i)).collect();
    let mut db: Vec<usize> = (0..n).map(|i| b.degree(i)).collect();
    let deg_a = da.clone();
    let deg_b = db.clone();
    da.sort_unstable();
    db.sort_unstable();
    if da != db {
        return None;
    }
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn go(
        k: usize,
        a: &DualGraph,
        b: &DualGraph,
        deg_a: &[usize],
        deg_b: &[usize],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if k == map.len() {
            return true;
        }
        for c in 0..map.len() {
            if used[c] || deg_a[k] != deg_b[c] {
                continue;
            }
            if (0..k).all(|j| a.intersection(k, j) == b.intersection(c, map[j])) {
                map[k] = c;
                used[c] = true;
                if go(k + 1, a, b, deg_a, deg_b, map, used) {
                    return true;
                }
                used[c] = false;
            }
        }
        false
    }
    go(0, a, b, &deg_a, &deg_b, &mut map, &mut used).then_some(map)
}

#[cfg(test)]
mod tests;
