//! The wild quotient singularity chart attached to an Eisenstein polynomial φ of degree p.
//!
//! With π = φ(0) and m the ramification break, the chart is generated by
//! `x_i = π^m x^i / φ` and presented by the 2×2 minors of the matrix with rows
//! `(X_i, X_{i+1})` and last row `(X_{p-1}, Z)`, where `Z = π^m − Σ a_i X_i`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{format_rat, padic_val, parse_rat, ExtVal, Prime, PrimeError, Rat};
use crate::poly::parse::{parse_multi, parse_ratfunc, parse_uni};
use crate::poly::{MultiPoly, PolyError, RatFunc, UniPoly};
use crate::valuation::{InductiveValuation, ValuationError};

/// Schema tag carried by every JSON document this crate emits.
pub const SCHEMA: &str = "maclane-surfaces/v1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EisensteinViolation {
    NotMonic,
    WrongDegree { expected: usize, got: Option<usize> },
    NotIntegral { index: usize },
    NotDivisible { index: usize },
    ConstantTermValuation(ExtVal),
}

impl fmt::Display for EisensteinViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotMonic => f.write_str("φ is not monic"),
            Self::WrongDegree { expected, got: Some(d) } => {
                write!(f, "φ has degree {d}, expected {expected}")
            }
            Self::WrongDegree { expected, got: None } => {
                write!(f, "φ is zero, expected degree {expected}")
            }
            Self::NotIntegral { index } => write!(f, "a_{index} is not p-integral"),
            Self::NotDivisible { index } => write!(f, "a_{index} is not divisible by p"),
            Self::ConstantTermValuation(v) => write!(f, "v_p(a_0) = {v}, expected 1"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WildQuotError {
    #[error("not Eisenstein: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    NotEisenstein(Vec<EisensteinViolation>),
    #[error("break m = {0} must be at least 2")]
    BreakTooSmall(u64),
    #[error("minor {minor} does not vanish on the generators: {residual}")]
    MinorDoesNotVanish { minor: String, residual: String },
    #[error("invalid coordinates: {0}")]
    InvalidCoords(String),
    #[error("invalid chart descriptor: {0}")]
    Descriptor(String),
    #[error(transparent)]
    Prime(#[from] PrimeError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Valuation(#[from] ValuationError),
}

/// Reports every failed Eisenstein condition for a degree-p polynomial.
pub fn check_eisenstein(phi: &UniPoly, p: Prime) -> Result<(), WildQuotError> {
    let mut bad = Vec::new();
    let expected = p.get() as usize;
    if phi.degree() != Some(expected) {
        bad.push(EisensteinViolation::WrongDegree {
            expected,
            got: phi.degree(),
        });
    }
    if !phi.is_zero() && !phi.is_monic() {
        bad.push(EisensteinViolation::NotMonic);
    }
    let deg = phi.degree().unwrap_or(0);
    for i in 0..deg {
        match padic_val(&phi.coeff(i), p) {
            ExtVal::Finite(v) if v.is_negative() => bad.push(EisensteinViolation::NotIntegral { index: i }),
            ExtVal::Finite(v) if v.is_zero() => bad.push(EisensteinViolation::NotDivisible { index: i }),
            _ => {}
        }
    }
    let v0 = padic_val(&phi.coeff(0), p);
    if v0 != ExtVal::from_int(1) && v0 > ExtVal::from_int(0) {
        bad.push(EisensteinViolation::ConstantTermValuation(v0));
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(WildQuotError::NotEisenstein(bad))
    }
}

/// `v_p(res(φ, φ'))/(p−1)` together with whether it is usable as a break.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BreakEstimate {
    #[serde(serialize_with = "ser_rat")]
    pub value: Rat,
    pub warning: Option<String>,
}

impl BreakEstimate {
    /// The break as an integer, when it is one and at least 2.
    pub fn as_break(&self) -> Option<u64> {
        if self.warning.is_none() {
            u64::try_from(self.value.to_integer()).ok()
        } else {
            None
        }
    }
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rat(r))
}

pub fn compute_break(phi: &UniPoly, p: Prime) -> Result<BreakEstimate, WildQuotError> {
    check_eisenstein(phi, p)?;
    let res = phi.resultant(&phi.derivative())?;
    let v = match padic_val(&res, p) {
        ExtVal::Finite(v) => v,
        ExtVal::Infinity => unreachable!("Eisenstein polynomials are separable"),
    };
    let value = v / Rat::from_integer((p.get() - 1).into());
    let warning = if !value.is_integer() {
        Some(format!(
            "v_p(disc)/(p-1) = {} is not an integer; the extension is not cyclic with a single break",
            format_rat(&value)
        ))
    } else if value < Rat::from_integer(2.into()) {
        Some(format!("break {} is below 2", format_rat(&value)))
    } else {
        None
    };
    Ok(BreakEstimate { value, warning })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildQuotData {
    p: Prime,
    phi: UniPoly,
    m: u64,
}

impl WildQuotData {
    pub fn new(p: Prime, phi: &UniPoly, m: u64) -> Result<Self, WildQuotError> {
        check_eisenstein(phi, p)?;
        if m < 2 {
            return Err(WildQuotError::BreakTooSmall(m));
        }
        Ok(WildQuotData {
            p,
            phi: phi.with_var("x"),
            m,
        })
    }

    /// The running example: p = 3, φ = x³ − 3x² + 3, m = 2.
    pub fn example() -> Self {
        Self::new(
            Prime::new(3).unwrap(),
            &UniPoly::from_ints("x", &[3, 0, -3, 1]),
            2,
        )
        .unwrap()
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn phi(&self) -> &UniPoly {
        &self.phi
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn pi_k(&self) -> Rat {
        self.phi.coeff(0)
    }

    /// `a_0, …, a_{p−1}`.
    pub fn coeffs(&self) -> Vec<Rat> {
        (0..self.p.get() as usize).map(|i| self.phi.coeff(i)).collect()
    }

    /// `π^m`.
    pub fn pi_m(&self) -> Rat {
        num_traits::pow(self.pi_k(), self.m as usize)
    }

    pub fn var_names(&self) -> Vec<String> {
        (0..self.p.get()).map(|i| format!("X{i}")).collect()
    }
}

/// `[π^m/φ, π^m x/φ, …, π^m x^{p−1}/φ]`.
pub fn chart_generators(data: &WildQuotData) -> Vec<RatFunc> {
    let pm = data.pi_m();
    (0..data.p.get() as usize)
        .map(|i| {
            RatFunc::new(UniPoly::monomial("x", i).scale(&pm), data.phi.clone())
                .expect("φ is nonzero")
        })
        .collect()
}

/// `z = π^m − Σ a_i x_i`, which equals `π^m x^p / φ`.
pub fn z_function(data: &WildQuotData) -> RatFunc {
    let gens = chart_generators(data);
    let mut z = RatFunc::constant("x", data.pi_m());
    for (a, g) in data.coeffs().iter().zip(&gens) {
        z = &z - &g.scale(a);
    }
    z
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartPresentation {
    pub variables: Vec<String>,
    pub matrix: Vec<[MultiPoly; 2]>,
    pub minors: Vec<MultiPoly>,
    pub generators: Vec<RatFunc>,
    pub z: RatFunc,
}

impl ChartPresentation {
    /// Replaces one matrix entry and recomputes the minors without validating.
    pub fn with_entry(&self, row: usize, col: usize, entry: MultiPoly) -> Self {
        let mut out = self.clone();
        out.matrix[row][col] = entry;
        out.minors = minors_of(&out.matrix);
        out
    }

    /// The linear form `Z` in the last row.
    pub fn z_form(&self) -> &MultiPoly {
        &self.matrix.last().unwrap()[1]
    }
}

fn minors_of(matrix: &[[MultiPoly; 2]]) -> Vec<MultiPoly> {
    let mut out = Vec::new();
    for i in 0..matrix.len() {
        for j in i + 1..matrix.len() {
            out.push(&(&matrix[i][0] * &matrix[j][1]) - &(&matrix[i][1] * &matrix[j][0]));
        }
    }
    out
}

fn build_presentation(data: &WildQuotData) -> ChartPresentation {
    let vars = data.var_names();
    let mut z = MultiPoly::constant(&vars, data.pi_m());
    for (a, v) in data.coeffs().iter().zip(&vars) {
        z = &z - &MultiPoly::var(&vars, v).scale(a);
    }
    let matrix: Vec<[MultiPoly; 2]> = (0..vars.len())
        .map(|i| {
            let right = vars
                .get(i + 1)
                .map(|v| MultiPoly::var(&vars, v))
                .unwrap_or_else(|| z.clone());
            [MultiPoly::var(&vars, &vars[i]), right]
        })
        .collect();
    ChartPresentation {
        variables: vars,
        minors: minors_of(&matrix),
        matrix,
        generators: chart_generators(data),
        z: z_function(data),
    }
}

/// Builds the presentation and fails if any minor does not vanish on the generators.
pub fn presentation_matrix(data: &WildQuotData) -> Result<ChartPresentation, WildQuotError> {
    let pres = build_presentation(data);
    let report = verify_presentation(&pres)?;
    if let Some(e) = report.entries.iter().find(|e| !e.residual.is_zero()) {
        return Err(WildQuotError::MinorDoesNotVanish {
            minor: e.minor.to_string(),
            residual: e.residual.to_string(),
        });
    }
    Ok(pres)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationEntry {
    pub minor: MultiPoly,
    pub residual: RatFunc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationReport {
    pub entries: Vec<RelationEntry>,
}

impl RelationReport {
    pub fn ok(&self) -> bool {
        self.entries.iter().all(|e| e.residual.is_zero())
    }
}

/// Substitutes the generator functions into every minor.
pub fn verify_presentation(pres: &ChartPresentation) -> Result<RelationReport, WildQuotError> {
    let map = pres
        .variables
        .iter()
        .cloned()
        .zip(pres.generators.iter().cloned())
        .collect();
    let entries = pres
        .minors
        .iter()
        .map(|m| {
            Ok(RelationEntry {
                minor: m.clone(),
                residual: m.eval_ratfunc("x", &map)?,
            })
        })
        .collect::<Result<Vec<_>, PolyError>>()?;
    Ok(RelationReport { entries })
}

pub fn verify_relations(data: &WildQuotData) -> Result<RelationReport, WildQuotError> {
    verify_presentation(&build_presentation(data))
}

/// `[v0, v(x)=1/p, v(φ)=m]`.
pub fn model_valuation(data: &WildQuotData) -> Result<InductiveValuation, WildQuotError> {
    let x = UniPoly::from_ints("x", &[0, 1]);
    let v = InductiveValuation::gauss(data.p)
        .augment(&x, Rat::new(1.into(), data.p.get().into()))?
        .augment(&data.phi, Rat::from_integer(data.m.into()))?;
    Ok(v)
}

/// An element `f = c0 + Σ_{i<r} Σ_{j<p} c[i][j] x^j φ^{i−r}` of the chart's function field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValCoords {
    pub c0: Rat,
    pub c: Vec<Vec<Rat>>,
    pub r: usize,
}

impl ValCoords {
    pub fn to_ratfunc(&self, data: &WildQuotData) -> Result<RatFunc, WildQuotError> {
        self.check(data)?;
        let phi = RatFunc::from_poly(data.phi.clone());
        let mut f = RatFunc::constant("x", self.c0.clone());
        for (i, row) in self.c.iter().enumerate() {
            let xs = UniPoly::new("x", row.clone());
            let term = &RatFunc::from_poly(xs) * &phi.pow(i as i32 - self.r as i32)?;
            f = &f + &term;
        }
        Ok(f)
    }

    fn check(&self, data: &WildQuotData) -> Result<(), WildQuotError> {
        let nonempty = self.c.iter().any(|row| row.iter().any(|c| !c.is_zero()));
        if nonempty && self.r < 1 {
            return Err(WildQuotError::InvalidCoords("r must be at least 1".into()));
        }
        if self.c.len() > self.r {
            return Err(WildQuotError::InvalidCoords(format!(
                "{} rows of c_ij but r = {}",
                self.c.len(),
                self.r
            )));
        }
        let p = data.p.get() as usize;
        if self.c.iter().any(|row| row.len() > p) {
            return Err(WildQuotError::InvalidCoords(format!("rows of c_ij have more than {p} entries")));
        }
        Ok(())
    }
}

/// `min{ v_p(c0), v_p(c_ij) + j/p − m(r−i) }`.
pub fn closed_form_val(data: &WildQuotData, coords: &ValCoords) -> Result<ExtVal, WildQuotError> {
    coords.check(data)?;
    let p = data.p;
    let pr = Rat::from_integer(p.get().into());
    let m = Rat::from_integer(data.m.into());
    let mut best = padic_val(&coords.c0, p);
    for (i, row) in coords.c.iter().enumerate() {
        let shift = &m * Rat::from_integer((coords.r - i).into());
        for (j, c) in row.iter().enumerate() {
            let t = padic_val(c, p) + &(Rat::from_integer(j.into()) / &pr - &shift);
            best = best.min(t);
        }
    }
    Ok(best)
}

/// Result of sampling competitors `v'` with `v'(x) ≥ 0` and `v'(φ) ≥ m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalityReport {
    pub candidates: usize,
    pub excluded: usize,
    pub violations: Vec<(String, String)>,
}

/// Checks `v ≤ v'` on `samples` for every admissible candidate `[v0, v(x)=a]`
/// and `[v0, v(x)=1/p, v(φ)=b]` drawn from the given grids.
pub fn check_minimality(
    data: &WildQuotData,
    x_grid: &[Rat],
    phi_grid: &[Rat],
    samples: &[UniPoly],
) -> Result<MinimalityReport, WildQuotError> {
    let v = model_valuation(data)?;
    let x = UniPoly::from_ints("x", &[0, 1]);
    let g = InductiveValuation::gauss(data.p);
    let mut candidates = Vec::new();
    for a in x_grid {
        if let Ok(c) = g.augment(&x, a.clone()) {
            candidates.push(c);
        }
    }
    let base = g.augment(&x, Rat::new(1.into(), data.p.get().into()))?;
    for b in phi_grid {
        if let Ok(c) = base.augment(&data.phi, b.clone()) {
            candidates.push(c);
        }
    }
    let m = ExtVal::Finite(Rat::from_integer(data.m.into()));
    let zero = ExtVal::zero();
    let mut report = MinimalityReport {
        candidates: 0,
        excluded: 0,
        violations: Vec::new(),
    };
    for c in candidates {
        if c.evaluate(&x) < zero || c.evaluate(&data.phi) < m {
            report.excluded += 1;
            continue;
        }
        report.candidates += 1;
        for f in samples {
            if v.evaluate(f) > c.evaluate(f) {
                report.violations.push((c.to_string(), f.to_string()));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartDescriptor {
    pub schema: String,
    pub p: u64,
    pub phi: String,
    pub m: u64,
    #[serde(rename = "pi_K")]
    pub pi_k: String,
    pub variables: Vec<String>,
    pub matrix: Vec<[String; 2]>,
    pub minors: Vec<String>,
    pub generators: Vec<String>,
}

impl ChartDescriptor {
    pub fn new(data: &WildQuotData, pres: &ChartPresentation) -> Self {
        ChartDescriptor {
            schema: SCHEMA.to_string(),
            p: data.p.get(),
            phi: data.phi.to_string(),
            m: data.m,
            pi_k: format_rat(&data.pi_k()),
            variables: pres.variables.clone(),
            matrix: pres
                .matrix
                .iter()
                .map(|[a, b]| [a.to_string(), b.to_string()])
                .collect(),
            minors: pres.minors.iter().map(ToString::to_string).collect(),
            generators: pres.generators.iter().map(ToString::to_string).collect(),
        }
    }

    /// Parses every field back and checks it against a fresh construction.
    pub fn parse(&self) -> Result<(WildQuotData, ChartPresentation), WildQuotError> {
        let bad = |m: String| WildQuotError::Descriptor(m);
        if self.schema != SCHEMA {
            return Err(bad(format!("unknown schema `{}`", self.schema)));
        }
        let p = Prime::new(self.p)?;
        let phi = parse_uni(&self.phi, "x")?;
        let data = WildQuotData::new(p, &phi, self.m)?;
        let pi_k = parse_rat(&self.pi_k).map_err(bad)?;
        if pi_k != data.pi_k() {
            return Err(bad("pi_K does not match φ(0)".into()));
        }
        let matrix = self
            .matrix
            .iter()
            .map(|[a, b]| Ok([parse_multi(a, &self.variables)?, parse_multi(b, &self.variables)?]))
            .collect::<Result<Vec<_>, PolyError>>()?;
        let minors = self
            .minors
            .iter()
            .map(|s| parse_multi(s, &self.variables))
            .collect::<Result<Vec<_>, _>>()?;
        let generators = self
            .generators
            .iter()
            .map(|s| parse_ratfunc(s, "x"))
            .collect::<Result<Vec<_>, _>>()?;
        let pres = ChartPresentation {
            variables: self.variables.clone(),
            matrix,
            minors,
            generators,
            z: z_function(&data),
        };
        if pres != presentation_matrix(&data)? {
            return Err(bad("presentation does not match the data".into()));
        }
        Ok((data, pres))
    }
}
