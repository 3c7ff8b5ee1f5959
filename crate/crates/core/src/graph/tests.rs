use super::*;
use crate::arith::Prime;
use crate::poly::UniPoly;
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

/// Fig. 2 plus C6 on C2, multiplicities (1,1,3,2,3,3,3).
fn example_graph(m: [u64; 7], c6_on: usize) -> DualGraph {
    let mut g = DualGraph::new();
    for (i, mi) in m.iter().enumerate() {
        g.add_vertex(format!("C{i}"), *mi);
    }
    for (a, b) in [(1, 3), (3, 5), (5, 4), (4, 2), (0, 5), (6, c6_on)] {
        g.add_edge(a, b, 1);
    }
    g
}

const M: [u64; 7] = [1, 1, 3, 2, 3, 3, 3];

fn seven() -> Vec<InductiveValuation> {
    let p = Prime::new(3).unwrap();
    let x = UniPoly::from_ints("x", &[0, 1]);
    let phi = UniPoly::from_ints("x", &[3, 0, -3, 1]);
    let g = InductiveValuation::gauss(p);
    let vx = |r| g.augment(&x, r).unwrap();
    let vphi = |s| vx(q(1, 3)).augment(&phi, s).unwrap();
    vec![g.clone(), vx(q(1, 1)), vphi(q(5, 3)), vx(q(1, 2)), vphi(q(4, 3)), vx(q(1, 3)), vphi(q(2, 1))]
}

#[test]
fn multiplicities() {
    assert_eq!(multiplicities_from_valuations(&seven()), M.to_vec());
    let v = seven();
    assert_eq!(multiplicities_from_valuations(&v[..1]), vec![1]);
    assert_eq!(multiplicities_from_valuations(&v[3..4]), vec![2]);
}

#[test]
fn self_intersections_of_example() {
    let g = solve_self_intersections(&example_graph(M, 2)).unwrap();
    let s: Vec<i64> = g.vertices.iter().map(|v| v.self_intersection.unwrap()).collect();
    assert_eq!(s, vec![-3, -2, -2, -2, -2, -2, -1]);
    assert!(check_graph_consistency(&g).passed());
    let exc = g.restrict(&["C0", "C1", "C2", "C3", "C4", "C5"]);
    assert!(exc.is_negative_definite().unwrap());
    assert!(!g.is_negative_definite().unwrap());
}

#[test]
fn small_systems() {
    let mut g = DualGraph::new();
    g.add_vertex("E", 1);
    g.add_vertex("F", 2);
    g.add_edge(0, 1, 1);
    assert_eq!(solve_self_intersection_at(&g, 0), Ok(-2));
    assert!(solve_self_intersections(&g).is_err());
    let mut h = DualGraph::new();
    h.add_vertex("E", 2);
    h.add_vertex("F", 3);
    h.add_edge(0, 1, 1);
    assert_eq!(
        solve_self_intersections(&h),
        Err(GraphError::NonIntegral { label: "E".into(), value: "-3/2".into() })
    );
}

#[test]
fn consistency_under_perturbation() {
    let solved = solve_self_intersections(&example_graph(M, 2)).unwrap();
    let mut moved = solved.clone();
    moved.edges.retain(|e| !(e.i == 2 && e.j == 6));
    moved.add_edge(4, 6, 1);
    let r = check_graph_consistency(&moved);
    assert_eq!(r.failing_rows(), BTreeSet::from([2, 4]));
    let mut m2 = solved.clone();
    m2.vertices[2].multiplicity = 2;
    assert_eq!(check_graph_consistency(&m2).failing_rows(), BTreeSet::from([2, 4, 6]));
    let mut missing = solved;
    missing.vertices[0].self_intersection = None;
    assert_eq!(check_graph_consistency(&missing).failing_rows(), BTreeSet::from([0]));
}

#[test]
fn predictions() {
    let p = predicted_graph(3, 2).unwrap();
    assert_eq!(p.graph.vertices.len(), 6);
    assert_eq!(p.attach_at, 3);
    assert!(!p.even_chain);
    let exc = example_graph(M, 2).restrict(&["C0", "C1", "C2", "C3", "C4", "C5"]);
    assert!(is_isomorphic(&p.graph, &exc));
    let p = predicted_graph(5, 2).unwrap();
    assert_eq!((p.graph.vertices.len(), p.attach_at), (10, 5));
    let p = predicted_graph(2, 1).unwrap();
    assert_eq!(p.graph.vertices.len(), 2);
    assert_eq!(p.graph.edges.len(), 1);
    let p = predicted_graph(3, 1).unwrap();
    assert!(p.even_chain);
    assert_eq!(p.attach_at, 1);
    assert!(predicted_graph(1, 1).is_err());
}

#[test]
fn isomorphism_rejects_other_attachments() {
    let chain = predicted_graph(3, 2).unwrap().graph;
    let mut other = chain.clone();
    let c0 = other.index_of("C0").unwrap();
    other.edges.retain(|e| e.i != c0 && e.j != c0);
    other.add_edge(c0, 1, 1);
    assert!(!is_isomorphic(&chain, &other));
    let mut heavy = chain.clone();
    heavy.edges[0].weight = 2;
    assert!(!is_isomorphic(&chain, &heavy));
}

#[test]
fn dot_and_json() {
    let g = solve_self_intersections(&example_graph(M, 2)).unwrap();
    let dot = g.to_dot();
    assert!(dot.starts_with("graph G {"));
    assert!(dot.contains("\"C0\" [label=\"C0 (m=1, self=-3)\", m=1, self=\"-3\"];"));
    assert!(dot.contains("\"C2\" -- \"C6\";"));
    let back = DualGraph::from_json(&g.to_json()).unwrap();
    assert_eq!(back, g);
    assert!(DualGraph::from_json(&serde_json::json!({"vertices": [], "edges": []})).is_err());
}

/// Positive definiteness of −A by exact LDLᵀ pivots, independent of the minors route.
fn neg_definite_by_pivots(a: &[Vec<Rat>]) -> bool {
    let n = a.len();
    let mut m: Vec<Vec<Rat>> = a.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    for k in 0..n {
        if !m[k][k].is_positive() {
            return false;
        }
        for i in k + 1..n {
            let f = &m[i][k] / &m[k][k];
            for j in k..n {
                let t = &f * &m[k][j];
                m[i][j] -= t;
            }
        }
    }
    true
}

#[test]
fn definiteness_matches_pivot_oracle() {
    let g = solve_self_intersections(&example_graph(M, 2)).unwrap();
    for labels in [
        vec!["C0", "C1", "C2", "C3", "C4", "C5"],
        vec!["C0", "C1", "C2", "C3", "C4", "C5", "C6"],
        vec!["C2", "C6"],
    ] {
        let sub = g.restrict(&labels);
        let m = sub.intersection_matrix().unwrap();
        assert_eq!(sub.is_negative_definite().unwrap(), neg_definite_by_pivots(&m));
    }
}

fn random_tree() -> impl Strategy<Value = DualGraph> {
    (2usize..9)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(1u64..4, n),
                prop::collection::vec(any::<prop::sample::Index>(), n - 1),
            )
        })
        .prop_map(|(ms, parents)| {
            let mut g = DualGraph::new();
            for (i, m) in ms.iter().enumerate() {
                g.add_vertex(format!("V{i}"), *m);
            }
            for (k, idx) in parents.iter().enumerate() {
                let child = k + 1;
                g.add_edge(idx.index(child), child, 1);
            }
            g
        })
}

proptest! {
    #![proptest_config(crate::testutil::seeded(64))]

    #[test]
    fn solved_graphs_are_consistent(g in random_tree()) {
        if let Ok(s) = solve_self_intersections(&g) {
            prop_assert!(check_graph_consistency(&s).passed());
        }
    }

    #[test]
    fn isomorphic_to_relabeling(g in random_tree(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = g.vertices.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let mut h = DualGraph::new();
        for &i in &perm {
            h.vertices.push(g.vertices[i].clone());
        }
        let inv: Vec<usize> = (0..n).map(|i| perm.iter().position(|&x| x == i).unwrap()).collect();
        for e in &g.edges {
            h.add_edge(inv[e.i], inv[e.j], e.weight);
        }
        prop_assert!(is_isomorphic(&g, &h));
    }
}
