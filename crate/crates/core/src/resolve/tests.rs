use std::collections::BTreeMap;

use super::*;
use crate::arith::{FiniteField, Prime};
use crate::poly::parse::parse_multi;
use crate::poly::{MultiPoly, RatFunc};
use crate::wildquot::{chart_generators, presentation_matrix, WildQuotData};

fn p3() -> Prime {
    Prime::new(3).unwrap()
}

fn strs(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn assert_gens(c: &AffineChart, expect: &[&str]) {
    let want: Vec<MultiPoly> = expect.iter().map(|e| parse_multi(e, &c.vars).unwrap()).collect();
    assert_eq!(c.generators, want, "{}", c.name);
}

fn fp_point(coords: &[u64]) -> Vec<crate::arith::FFElem> {
    let f = FiniteField::prime_field(p3());
    coords.iter().map(|&a| f.from_u64(a)).collect()
}

fn example_state() -> ResolutionState {
    resolve_example(&WildQuotData::example()).unwrap()
}


#[test]
fn tjurina_generators() {
    let data = WildQuotData::example();
    let pres = presentation_matrix(&data).unwrap();
    let [t1, s1] = tjurina_transform(&pres, p3()).unwrap();
    assert_eq!(t1.name, "t=1");
    assert_gens(&t1, &["s*x0 - x1", "s*x1 - x2", "s*x2 - (9 - 3*x0 + 3*x2)"]);
    assert_gens(&s1, &["x0 - t*x1", "x1 - t*x2", "x2 - t*(9 - 3*x0 + 3*x2)"]);
    let c0: Vec<String> = t1.divisors[0].equations.iter().map(ToString::to_string).collect();
    assert_eq!(c0, ["x0", "x1", "x2", "3"]);
}

#[test]
fn tjurina_vanishes_on_generator_functions() {
    let data = WildQuotData::example();
    let pres = presentation_matrix(&data).unwrap();
    let [t1, s1] = tjurina_transform(&pres, p3()).unwrap();
    let mut map: BTreeMap<String, RatFunc> = chart_generators(&data)
        .into_iter()
        .enumerate()
        .map(|(i, g)| (format!("x{i}"), g))
        .collect();
    map.insert("s".into(), RatFunc::var_of("x"));
    map.insert("t".into(), RatFunc::var_of("x").inv().unwrap());
    for g in t1.generators.iter().chain(&s1.generators) {
        assert!(g.eval_ratfunc("x", &map).unwrap().is_zero(), "{g}");
    }
}

#[test]
fn elimination() {
    let data = WildQuotData::example();
    let pres = presentation_matrix(&data).unwrap();
    let [t1, s1] = tjurina_transform(&pres, p3()).unwrap();
    let e = eliminate_linear(&t1, p3()).unwrap();
    assert_eq!(e.vars, strs(&["x0", "s"]));
    assert_gens(&e, &["s^3*x0 - 3*s^2*x0 + 3*x0 - 9"]);
    let c0: Vec<String> = e.divisors[0].equations.iter().map(ToString::to_string).collect();
    assert_eq!(c0, ["3", "x0"]);
    let e2 = eliminate_linear(&s1, p3()).unwrap();
    assert_eq!(e2.vars, strs(&["x2", "t"]));
    assert_gens(&e2, &["x2*(1 + 3*t^3 - 3*t) - 9*t"]);
    assert_eq!(eliminate_linear(&e, p3()).unwrap(), e);
}

#[test]
fn elimination_needs_linear_generator() {
    let vars = strs(&["a", "b"]);
    let chart = AffineChart {
        id: 0,
        name: "q".into(),
        vars: vars.clone(),
        relation: None,
        generators: vec![parse_multi("a^2 - b^2", &vars).unwrap(), parse_multi("a*b - 3", &vars).unwrap()],
        divisors: Vec::new(),
        map: None,
    };
    assert!(matches!(eliminate_linear(&chart, p3()), Err(ResolveError::NoEliminableGenerator)));
}

#[test]
fn singular_locus_of_example() {
    let st = example_state();
    let e = st.chart(3);
    assert_eq!(e.name, "t=1");
    let sing = special_fiber_singular_points(e, p3(), 1).unwrap();
    assert_eq!(sing, vec![fp_point(&[0, 0])]);
    let sing2 = special_fiber_singular_points(e, p3(), 2).unwrap();
    assert_eq!(sing2.len(), 1);
    assert!(matches!(
        special_fiber_singular_points(e, p3(), 5),
        Err(ResolveError::KMaxTooLarge(5))
    ));
    let x2 = st.chart(6);
    assert_eq!(special_fiber_singular_points(x2, p3(), 1).unwrap(), vec![fp_point(&[0, 0, 0])]);
}

#[test]
fn smooth_hypersurface_has_no_singular_points() {
    let vars = strs(&["x", "y"]);
    let c = AffineChart::hypersurface("f", &vars, MultiPoly::var(&vars, "x"), None, p3()).unwrap();
    assert!(special_fiber_singular_points(&c, p3(), 2).unwrap().is_empty());
}

#[test]
fn first_blowup() {
    let st = example_state();
    let step = &st.log()[3];
    assert_eq!(step.kind, StepKind::Blowup);
    assert_eq!(step.divisors_born, ["C1", "C2"]);
    let charts: Vec<&AffineChart> = step.charts_created.iter().map(|&i| st.chart(i)).collect();
    let x2 = charts[1];
    assert_eq!(x2.vars, strs(&["y0", "s", "y2"]));
    assert_eq!(x2.relation_string(p3()).unwrap(), "3 = s*y2");
    assert_gens(x2, &["s^2*y0 - s^2*y0*y2 + y0*y2 - y2^2"]);
    for c in [charts[0], charts[2]] {
        assert!(special_fiber_singular_points(c, p3(), 1).unwrap().is_empty(), "{}", c.name);
    }
    assert_eq!(st.divisor("C1").unwrap().multiplicity, Some(1));
    assert_eq!(st.divisor("C2").unwrap().multiplicity, Some(3));
}

#[test]
fn blowup_off_surface_fails() {
    let st = example_state();
    let e = st.chart(3);
    assert!(matches!(blowup(e, p3(), &[1, 1]), Err(ResolveError::PointNotOnSurface(_))));
}

#[test]
fn three_components_at_second_center() {
    let st = example_state();
    let x2 = st.chart(6);
    let origin = fp_point(&[0, 0, 0]);
    let labels: Vec<&str> = x2.divisors_through(&origin).iter().map(|d| d.label.as_str()).collect();
    assert_eq!(labels, ["C0", "C1", "C2"]);
    assert!(matches!(is_snc_at(x2, p3(), &origin), Err(ResolveError::SingularPoint(_))));
}

#[test]
fn snc_diagnosis() {
    let vars = strs(&["x", "y", "z"]);
    let rel = Some(BTreeMap::from([("x".to_string(), 1), ("y".to_string(), 1)]));
    let lines = AffineChart::hypersurface("lines", &vars, MultiPoly::var(&vars, "z"), rel, p3()).unwrap();
    assert_eq!(lines.divisors.len(), 2);
    let d = is_snc_at(&lines, p3(), &fp_point(&[0, 0, 0])).unwrap();
    assert!(d.snc);
    assert_eq!(d.transverse, Some(true));
    let one = is_snc_at(&lines, p3(), &fp_point(&[1, 0, 0])).unwrap();
    assert!(one.snc && one.components.len() == 1);

    let vars2 = strs(&["x", "y"]);
    let f = parse_multi("x*y*(x + y) - 3", &vars2).unwrap();
    let three = AffineChart::hypersurface("three", &vars2, f, None, p3()).unwrap();
    let d = is_snc_at(&three, p3(), &fp_point(&[0, 0])).unwrap();
    assert!(!d.snc);
    assert_eq!(d.components.len(), 3);

    let f = parse_multi("y - x^2 + 3", &vars2).unwrap();
    let tangent = AffineChart::hypersurface("tan", &vars2, &f * &MultiPoly::var(&vars2, "y"), None, p3());
    let tangent = tangent.unwrap();
    let d = is_snc_at(&tangent, p3(), &fp_point(&[0, 0]));
    assert!(matches!(d, Err(ResolveError::SingularPoint(_))) || !d.unwrap().snc);
}

#[test]
fn example_terminates_after_three_blowups() {
    let st = example_state();
    assert_eq!(st.blowup_count(), 3);
    let kinds: Vec<StepKind> = st.log().iter().map(|s| s.kind).collect();
    assert_eq!(kinds[0], StepKind::Tjurina);
    assert!(st.is_terminal().unwrap());
    let exc: Vec<&str> = st
        .registry()
        .iter()
        .filter(|d| d.exceptional)
        .map(|d| d.label.as_str())
        .collect();
    assert_eq!(exc, ["C0", "C1", "C2", "C3", "C4", "C5"]);
    assert_eq!(st.log()[5].divisors_born, ["C5"]);
    for leaf in st.leaves() {
        assert!(special_fiber_singular_points(leaf, p3(), 1).unwrap().is_empty());
    }
}

#[test]
fn dual_graph_of_example() {
    let st = example_state();
    let g = dual_graph(&st).unwrap();
    let labels: Vec<&str> = g.vertices.iter().map(|v| v.label.as_str()).collect();
    assert_eq!(labels, ["C0", "C1", "C2", "C3", "C4", "C5", "C6"]);
    let m: Vec<u64> = g.vertices.iter().map(|v| v.multiplicity).collect();
    assert_eq!(m, [1, 1, 3, 2, 3, 3, 3]);
    let mut edges: Vec<(String, String, u64)> = g
        .edges
        .iter()
        .map(|e| (g.vertices[e.i].label.clone(), g.vertices[e.j].label.clone(), e.weight))
        .collect();
    edges.sort();
    let expect = [("C0", "C5"), ("C1", "C3"), ("C2", "C4"), ("C2", "C6"), ("C3", "C5"), ("C4", "C5")];
    let expect: Vec<(String, String, u64)> =
        expect.iter().map(|(a, b)| (a.to_string(), b.to_string(), 1)).collect();
    assert_eq!(edges, expect);
}

#[test]
fn empty_registry_gives_empty_graph() {
    let st = ResolutionState::new(&WildQuotData::example(), 1).unwrap();
    assert!(dual_graph(&st).unwrap().vertices.is_empty());
}

#[test]
fn non_terminal_state_rejected() {
    let mut st = ResolutionState::new(&WildQuotData::example(), 1).unwrap();
    st.tjurina().unwrap();
    st.eliminate(1).unwrap();
    st.eliminate(2).unwrap();
    assert!(matches!(dual_graph(&st), Err(ResolveError::NonTerminal(_))));
}

#[test]
fn iteration_cap() {
    let mut st = ResolutionState::new(&WildQuotData::example(), 1).unwrap();
    let err = st.run(1).unwrap_err();
    match err {
        ResolveError::IterationCap(dump) => assert!(dump.contains("pending center")),
        e => panic!("{e}"),
    }
}

#[test]
fn replay_reproduces_state() {
    let st = example_state();
    let again = ResolutionState::replay(st.data(), 1, st.log()).unwrap();
    assert_eq!(again.to_json(), st.to_json());
    let mut bad = st.log().to_vec();
    bad[4].center = Some(vec![1, 0, 0]);
    assert!(ResolutionState::replay(st.data(), 1, &bad).is_err());
}

#[test]
fn extension_points_do_not_change_the_graph() {
    let st = resolve(&WildQuotData::example(), 2, DEFAULT_BLOWUP_CAP).unwrap();
    assert_eq!(st.blowup_count(), 3);
    let g = dual_graph(&st).unwrap();
    assert_eq!(g.edges.len(), 6);
}

#[test]
fn json_round_trip() {
    let st = example_state();
    let v = st.to_json();
    let back = ResolutionState::from_json(&v).unwrap();
    assert_eq!(back.to_json(), v);
    assert_eq!(v["blowups"], 3);
}
