use latgauge::structured_graph::*;
use proptest::prelude::*;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn two_piece(sign1: i8) -> (SegmentPool, StructuredGraph, StructuredGraph, RefinementWitness) {
    let (pool, coarse) = line_graph("c", 2);
    let f1 = if sign1 > 0 {
        Edge { id: "f1".into(), source: "v0".into(), target: "v1".into(), chain: vec![("s1".into(), 1)] }
    } else {
        Edge { id: "f1".into(), source: "v1".into(), target: "v0".into(), chain: vec![("s1".into(), -1)] }
    };
    let f2 = Edge { id: "f2".into(), source: "v1".into(), target: "v2".into(), chain: vec![("s2".into(), 1)] };
    let fine = StructuredGraph { id: "f".into(), vertices: vec!["v0".into(), "v1".into(), "v2".into()], edges: vec![f2, f1] };
    let w = RefinementWitness {
        id: "w".into(),
        coarse: "c".into(),
        fine: "f".into(),
        decompositions: vec![Decomposition {
            coarse_edge: "e".into(),
            pieces: vec![Piece { edge: "f2".into(), sign: 1 }, Piece { edge: "f1".into(), sign: sign1 }],
            weights: vec![0.0, 1.0],
        }],
    };
    (pool, coarse, fine, w)
}

#[test]
fn forward_split_is_valid() {
    let (pool, coarse, fine, w) = two_piece(1);
    assert!(coarse.validate(&pool).is_empty());
    assert!(fine.validate(&pool).is_empty());
    assert!(validate_witness(&w, &coarse, &fine).is_empty());
}

#[test]
fn chain_mismatch_reported() {
    let (_, coarse, fine, mut w) = two_piece(1);
    w.decompositions[0].pieces.reverse();
    let errs = validate_witness(&w, &coarse, &fine);
    assert!(errs.iter().any(|e| e.contains("chain mismatch")), "{errs:?}");
}

#[test]
fn weight_sum_reported() {
    let (_, coarse, fine, mut w) = two_piece(1);
    w.decompositions[0].weights = vec![0.3, 0.3];
    let errs = validate_witness(&w, &coarse, &fine);
    assert!(errs.iter().any(|e| e.contains("weights sum ≠ 1")), "{errs:?}");
}

#[test]
fn all_violations_listed() {
    let (_, coarse, fine, mut w) = two_piece(1);
    w.decompositions[0].weights = vec![0.3, 0.3];
    w.decompositions[0].pieces.push(Piece { edge: "ghost".into(), sign: 1 });
    w.decompositions[0].pieces.push(Piece { edge: "f2".into(), sign: 1 });
    let errs = validate_witness(&w, &coarse, &fine);
    assert!(errs.iter().any(|e| e.contains("dangling fine edge id ghost")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("repeated")), "{errs:?}");
    assert!(errs.iter().any(|e| e.contains("weights")), "{errs:?}");
    assert!(resolve(&w, &coarse, &fine).is_err());
}

#[test]
fn broken_graph_chain_reported() {
    let (pool, mut coarse) = line_graph("c", 3);
    coarse.edges[0].chain.swap(0, 1);
    let errs = coarse.validate(&pool);
    assert!(errs.iter().any(|e| e.contains("not connected")), "{errs:?}");
}

#[test]
fn order_class_examples() {
    let (_, coarse, fine, w) = two_piece(1);
    let oc = order_class_checked(&w, &coarse, &fine).unwrap();
    assert!(oc.leq && oc.lessdot_l && oc.lessdot_r);
    assert_eq!(oc.label(), "leq");

    // [(f2,+1),(f1,-1)]: terminal orientation matches
    let (_, coarse, fine, w) = two_piece(-1);
    let oc = order_class_checked(&w, &coarse, &fine).unwrap();
    assert!(!oc.leq && oc.lessdot_l && !oc.lessdot_r && oc.lesssim());

    // mirror case [(f2,-1),(f1,+1)]
    let mut w2 = w.clone();
    w2.decompositions[0].pieces = vec![Piece { edge: "f2".into(), sign: -1 }, Piece { edge: "f1".into(), sign: 1 }];
    let oc = order_class(&w2);
    assert!(!oc.lessdot_l && oc.lessdot_r);
}

#[test]
fn invert_graph_examples() {
    let empty = StructuredGraph { id: "z".into(), vertices: vec![], edges: vec![] };
    assert!(invert_graph(&empty).edges.is_empty());
    let (pool, g) = line_graph("c", 3);
    let inv = invert_graph(&g);
    assert_eq!(inv.edges[0].source, "v3");
    assert_eq!(inv.edges[0].chain[0], ("s3".to_string(), -1));
    assert!(inv.validate(&pool).is_empty());
    assert_eq!(invert_graph(&inv), g);
}

#[test]
fn witness_transformer_reverses_and_keeps_signs() {
    let (pool, coarse, fine, w) = two_piece(-1);
    let wi = invert_witness(&w);
    let p: Vec<(String, i8)> = wi.decompositions[0].pieces.iter().map(|p| (p.edge.clone(), p.sign)).collect();
    assert_eq!(p, vec![("f1".to_string(), -1), ("f2".to_string(), 1)]);
    let (ci, fi) = (invert_graph(&coarse), invert_graph(&fine));
    assert!(ci.validate(&pool).is_empty() && fi.validate(&pool).is_empty());
    assert!(validate_witness(&wi, &ci, &fi).is_empty());
    assert!(order_class(&wi).lessdot_r && !order_class(&wi).lessdot_l);
    assert_eq!(invert_witness(&wi), w);
}

#[test]
fn inverted_coarse_against_same_fine_graph() {
    let (pool, coarse, fine, w) = two_piece(-1);
    let (ci, wi) = invert_coarse(&w, &coarse);
    assert!(ci.validate(&pool).is_empty());
    assert!(validate_witness(&wi, &ci, &fine).is_empty(), "{:?}", validate_witness(&wi, &ci, &fine));
    let p: Vec<(String, i8)> = wi.decompositions[0].pieces.iter().map(|p| (p.edge.clone(), p.sign)).collect();
    assert_eq!(p, vec![("f1".to_string(), 1), ("f2".to_string(), -1)]);
}

fn three_edge_chain(policy: Policy) -> (StructuredGraph, StructuredGraph, StructuredGraph, RefinementWitness, RefinementWitness) {
    // e = e3 o e1', e1' = e2 o e1
    let (_, coarse) = line_graph("l", 3);
    let mid = StructuredGraph {
        id: "m".into(),
        vertices: vec!["v0".into(), "v2".into(), "v3".into()],
        edges: vec![
            Edge { id: "e3".into(), source: "v2".into(), target: "v3".into(), chain: vec![("s3".into(), 1)] },
            Edge { id: "e1'".into(), source: "v0".into(), target: "v2".into(), chain: vec![("s1".into(), 1), ("s2".into(), 1)] },
        ],
    };
    let fine = StructuredGraph {
        id: "f".into(),
        vertices: vec!["v0".into(), "v1".into(), "v2".into(), "v3".into()],
        edges: vec![
            Edge { id: "e3".into(), source: "v2".into(), target: "v3".into(), chain: vec![("s3".into(), 1)] },
            Edge { id: "e2".into(), source: "v1".into(), target: "v2".into(), chain: vec![("s2".into(), 1)] },
            Edge { id: "e1".into(), source: "v0".into(), target: "v1".into(), chain: vec![("s1".into(), 1)] },
        ],
    };
    let p = |e: &str| Piece { edge: e.into(), sign: 1 };
    let w1 = RefinementWitness {
        id: "w1".into(),
        coarse: "l".into(),
        fine: "m".into(),
        decompositions: vec![Decomposition { coarse_edge: "e".into(), pieces: vec![p("e3"), p("e1'")], weights: vec![0.0, 0.0] }],
    }
    .with_policy(policy);
    let w2 = RefinementWitness {
        id: "w2".into(),
        coarse: "m".into(),
        fine: "f".into(),
        decompositions: vec![
            Decomposition { coarse_edge: "e3".into(), pieces: vec![p("e3")], weights: vec![1.0] },
            Decomposition { coarse_edge: "e1'".into(), pieces: vec![p("e2"), p("e1")], weights: vec![0.0, 0.0] },
        ],
    }
    .with_policy(policy);
    (coarse, mid, fine, w1, w2)
}

#[test]
fn compose_with_identity_returns_first() {
    let (coarse, mid, fine, w1, w2) = three_edge_chain(Policy::Left);
    let id = mid.identity_witness();
    let c = compose_witnesses(&w1, &id).unwrap();
    assert_eq!(c.decompositions, w1.decompositions);
    assert!(validate_witness(&compose_witnesses(&w1, &w2).unwrap(), &coarse, &fine).is_empty());
}

#[test]
fn compose_three_edge_policies() {
    let (_, _, _, w1, w2) = three_edge_chain(Policy::Left);
    let c = compose_witnesses(&w1, &w2).unwrap();
    // terminal first: delta on e3
    assert_eq!(c.decompositions[0].weights, vec![1.0, 0.0, 0.0]);
    let (_, _, _, w1, w2) = three_edge_chain(Policy::Right);
    let c = compose_witnesses(&w1, &w2).unwrap();
    assert_eq!(c.decompositions[0].weights, vec![0.0, 0.0, 1.0]);
    let (_, _, _, w1, _) = three_edge_chain(Policy::Left);
    let (_, _, _, _, w2) = three_edge_chain(Policy::Right);
    assert!(compose_witnesses(&w1, &w2).is_err());
}

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Q::new(n, d)
}

/// Composite weights (c_3, c_2, c_1) for the bracketing e3 o (e2 o e1).
fn bracket_a(c31: Q, c3_21: Q) -> Vec<Q> {
    let one = q(1, 1);
    compose_weight_vectors(&[c31, one - c31], &[1, 1], &[vec![one], vec![one - c3_21, c3_21]])
}

/// Composite weights for the bracketing (e3 o e2) o e1.
fn bracket_b(c21: Q, c32_1: Q) -> Vec<Q> {
    let one = q(1, 1);
    compose_weight_vectors(&[one - c21, c21], &[1, 1], &[vec![one - c32_1, c32_1], vec![one]])
}

#[test]
fn composed_weight_equations_symbolic() {
    let one = q(1, 1);
    for (a, b) in [(q(1, 3), q(2, 7)), (q(5, 11), q(1, 2)), (q(0, 1), q(3, 4))] {
        let wa = bracket_a(a, b);
        // c1 = (1 - c^{31'}_3) c^{3(21)}_1, c2 = (1 - c^{31'}_3)(1 - c^{3(21)}_1), c3 = c^{31'}_3
        assert_eq!(wa, vec![a, (one - a) * (one - b), (one - a) * b]);
        let wb = bracket_b(a, b);
        // c1 = c^{2'1}_1, c2 = (1 - c^{2'1}_1) c^{(32)1}_2, c3 = (1 - c^{2'1}_1)(1 - c^{(32)1}_2)
        assert_eq!(wb, vec![(one - a) * (one - b), (one - a) * b, a]);
        assert_eq!(wa.iter().copied().sum::<Q>(), one);
    }
}

#[test]
fn poisson_cases_are_the_three_deltas() {
    let bits = [q(0, 1), q(1, 1)];
    let deltas: Vec<Vec<Q>> = (0..3).map(|n| (0..3).map(|k| if k == n { q(1, 1) } else { q(0, 1) }).collect()).collect();
    for f in [bracket_a as fn(Q, Q) -> Vec<Q>, bracket_b] {
        let mut seen: Vec<Vec<Q>> = Vec::new();
        for a in bits {
            for b in bits {
                let w = f(a, b);
                assert!(deltas.contains(&w), "{w:?}");
                if !seen.contains(&w) {
                    seen.push(w);
                }
            }
        }
        assert_eq!(seen.len(), 3);
    }
}

fn chain3(seed: u64, p_flip: f64, policy: Policy) -> Vec<RefinementWitness> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (pool, g0) = line_graph("g0", 8);
    let (g1, w1) = random_refinement(&g0, &pool, "g1", 3, p_flip, policy, &mut rng);
    let (g2, w2) = random_refinement(&g1, &pool, "g2", 2, p_flip, policy, &mut rng);
    let (g3, w3) = random_refinement(&g2, &pool, "g3", 2, p_flip, policy, &mut rng);
    for (w, a, b) in [(&w1, &g0, &g1), (&w2, &g1, &g2), (&w3, &g2, &g3)] {
        assert!(b.validate(&pool).is_empty());
        assert!(validate_witness(w, a, b).is_empty(), "{:?}", validate_witness(w, a, b));
    }
    vec![w1, w2, w3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn order_class_respects_composition(seed in any::<u64>(), p_flip in 0.0f64..=1.0) {
        let ws = chain3(seed, p_flip, Policy::Left);
        let c = compose_witnesses(&ws[0], &ws[1]).unwrap();
        let (a, b, k) = (order_class(&ws[0]), order_class(&ws[1]), order_class(&c));
        prop_assert!(!(a.leq && b.leq) || k.leq);
        prop_assert!(!(a.lessdot_l && b.lessdot_l) || k.lessdot_l);
        prop_assert!(!(a.lessdot_r && b.lessdot_r) || k.lessdot_r);
        let ws = chain3(seed, 0.0, Policy::Right);
        prop_assert!(order_class(&compose_witnesses(&ws[0], &ws[1]).unwrap()).leq);
    }

    #[test]
    fn inversion_swaps_lessdot_classes(seed in any::<u64>(), p_flip in 0.0f64..=1.0) {
        for w in &chain3(seed, p_flip, Policy::Left) {
            let (a, b) = (order_class(w), order_class(&invert_witness(w)));
            prop_assert_eq!(a.lessdot_l, b.lessdot_r);
            prop_assert_eq!(a.lessdot_r, b.lessdot_l);
            prop_assert_eq!(a.leq, b.leq);
        }
    }

    #[test]
    fn inversion_is_an_involution(seed in any::<u64>(), p_flip in 0.0f64..=1.0) {
        for w in &chain3(seed, p_flip, Policy::Right) {
            prop_assert_eq!(&invert_witness(&invert_witness(w)), w);
        }
    }

    #[test]
    fn composition_is_associative(seed in any::<u64>(), right in any::<bool>(), k in 1i64..8) {
        let policy = if right { Policy::Right } else { Policy::Left };
        let ws = chain3(seed, 0.0, policy);
        let ab_c = compose_witnesses(&compose_witnesses(&ws[0], &ws[1]).unwrap(), &ws[2]).unwrap();
        let a_bc = compose_witnesses(&ws[0], &compose_witnesses(&ws[1], &ws[2]).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        // generic dyadic weights
        let ws: Vec<RefinementWitness> =
            chain3(seed, 0.3, Policy::Left).iter().map(|w| w.with_binary_weight(k as f64 / 8.0)).collect();
        let ab_c = compose_witnesses(&compose_witnesses(&ws[0], &ws[1]).unwrap(), &ws[2]).unwrap();
        let a_bc = compose_witnesses(&ws[0], &compose_witnesses(&ws[1], &ws[2]).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
    }
}
