use proptest::prelude::*;

use super::*;
use crate::adversary::{best_response_lp, best_response_milp, brute_force_br};
use crate::netgraph::{fixtures, gen_er};
use crate::optikit::solve_milp;

fn weighted_star() -> Graph {
    fixtures::star(5).with_weights(vec![2.0, 1.0, 1.0, 1.0, 1.0]).unwrap()
}

fn exact_at(g: &Graph, r: &DefenseResult, k_a: usize) -> f64 {
    let h = g.without_edges(&r.blocked_edges).unwrap();
    brute_force_br(&h, &r.blocked, k_a).unwrap().value
}

fn arbitrary_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (3..=max_n, any::<bool>())
        .prop_flat_map(|(n, directed)| (Just(n), Just(directed), prop::collection::vec(0.0..1.0f64, n * n)))
        .prop_map(|(n, directed, coins)| {
            let mut edges = Vec::new();
            for u in 0..n {
                for v in 0..n {
                    let keep = if directed { u != v } else { u < v };
                    if keep && coins[u * n + v] < 0.35 {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, directed, &edges).unwrap()
        })
}

fn with_random_weights(g: Graph, w: &[u8]) -> Graph {
    let weights = (0..g.n()).map(|i| f64::from(w[i % w.len()] % 4)).collect();
    g.with_weights(weights).unwrap()
}

#[test]
fn def_milp_shape_and_star() {
    let star = fixtures::star(5);
    let (m, vars) = build_def_milp(&star, 1, 1, None).unwrap();
    assert_eq!(m.num_binaries(), 5);
    assert_eq!(m.num_vars() - m.num_binaries(), 26);
    assert_eq!(m.num_rows(), 31);
    assert_eq!(vars.big_m, 5.0);
    let r = solve_milp(&m, &Default::default());
    assert!((r.objective - 1.0).abs() < 1e-9);
    assert!(r.values[vars.x[0].unwrap().0] > 0.5);

    let d = def_milp(&star, 1, 1).unwrap();
    assert_eq!(d.blocked.nodes(), &[0]);
    assert!((d.bound - 1.0).abs() < 1e-9);
    assert!(matches!(build_def_milp(&star, 6, 1, None), Err(crate::Error::Parameter(_))));
}

#[test]
fn degenerate_budgets() {
    let g = gen_er(12, 0.3, 5).unwrap();
    let none = def_milp(&g, 0, 2).unwrap();
    assert!(none.blocked.is_empty());
    assert!((none.bound - best_response_lp(&g, &BlockSet::empty(), 2).unwrap()).abs() < 1e-9);
    assert_eq!(def_milp(&g, 3, 0).unwrap().bound, 0.0);
}

#[test]
fn weighted_star_blocks_center() {
    // With the heavy center blocked every leaf is isolated, so the best
    // remaining seed covers weight 1.
    let g = weighted_star();
    let d = def_milp(&g, 1, 1).unwrap();
    assert_eq!(d.blocked.nodes(), &[0]);
    let oracle = (0..5).map(|v| best_response_lp(&g, &BlockSet::exact([v]), 1).unwrap()).fold(f64::INFINITY, f64::min);
    assert!((oracle - 1.0).abs() < 1e-9);
    assert!((d.bound - oracle).abs() < 1e-9);
    // A heavy leaf is what remains after the center goes.
    let heavy_leaf = fixtures::star(5).with_weights(vec![1.0, 2.0, 1.0, 1.0, 1.0]).unwrap();
    let d = def_milp(&heavy_leaf, 1, 1).unwrap();
    assert_eq!(d.blocked.nodes(), &[0]);
    assert!((d.bound - 2.0).abs() < 1e-9);
}

#[test]
fn path_blocks_an_inner_node() {
    let d = def_milp(&fixtures::path(4), 1, 1).unwrap();
    assert!(d.blocked.nodes() == [1] || d.blocked.nodes() == [2]);
    assert!((d.bound - 2.0).abs() < 1e-9);
}

#[test]
fn cg_on_star() {
    let r = constraint_generation(&fixtures::star(5), 1, 1, 0.0, &CgLimits::default()).unwrap();
    assert_eq!(r.blocked.nodes(), &[0]);
    assert_eq!(r.bound, 1.0);
    assert!(r.iterations.len() <= 3, "{} iterations", r.iterations.len());
    assert_eq!(r.iterations[0].blocked, Vec::<usize>::new());
}

#[test]
fn cg_limit_returns_incumbent() {
    let g = gen_er(12, 0.3, 9).unwrap();
    let limits = CgLimits { max_iterations: 1, ..CgLimits::default() };
    let r = constraint_generation(&g, 2, 2, 0.0, &limits).unwrap();
    assert_eq!(r.status, Some(crate::optikit::Status::FeasibleWithGap));
    assert_eq!(r.iterations.len(), 1);
    assert!(constraint_generation(&g, 2, 2, -1.0, &limits).is_err());
}

#[test]
fn cut_pool_scores_repaired_attacks() {
    let g = fixtures::path(4);
    let mut pool = CutPool::new(&g, 1);
    pool.add(&g, &[1]);
    assert_eq!(pool.evaluate(&g, &[false; 4]).0, 3.0);
    assert_eq!(pool.evaluate(&g, &[false, true, false, false]).0, 0.0);
    assert_eq!(pool.evaluate(&g, &[true, false, false, false]).0, 2.0);
    assert!(pool.contains(&[1]) && !pool.contains(&[2]));
}

#[test]
fn pruned_examples() {
    let star = fixtures::star(5);
    let r = pruned_milp(&star, 1, 1, 1, PruneOrder::Degree).unwrap();
    assert_eq!(r.blocked.nodes(), &[0]);
    assert!(matches!(pruned_milp(&star, 2, 1, 1, PruneOrder::Wdom), Err(crate::Error::Parameter(_))));
    let g = gen_er(14, 0.25, 3).unwrap();
    let full = def_milp(&g, 2, 2).unwrap();
    let pruned = pruned_milp(&g, 2, 2, 14, PruneOrder::Wdom).unwrap();
    assert!((full.bound - pruned.bound).abs() < 1e-9);
}

#[test]
fn wdom_examples() {
    assert_eq!(wdom_scores(&fixtures::star(5)), vec![5.0, 2.0, 2.0, 2.0, 2.0]);
    let p = fixtures::path(4).with_weights(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(wdom_scores(&p), vec![3.0, 6.0, 9.0, 7.0]);
    let lone = Graph::from_edges(2, false, &[]).unwrap().with_weights(vec![0.5, 3.0]).unwrap();
    assert_eq!(wdom_scores(&lone), vec![0.5, 3.0]);
    let arc = Graph::from_edges(2, true, &[(0, 1)]).unwrap();
    assert_eq!(wdom_scores(&arc), vec![1.0, 2.0]);
}

#[test]
fn brute_defense_examples() {
    let s = brute_force_defense(&fixtures::star(5), 1, 1).unwrap();
    assert_eq!((s.blocked.nodes(), s.bound), (&[0][..], 1.0));
    assert_eq!(brute_force_defense(&fixtures::complete(4), 1, 1).unwrap().bound, 3.0);
    assert_eq!(brute_force_defense(&fixtures::path(4), 2, 1).unwrap().bound, 1.0);
    let big = gen_er(40, 0.1, 1).unwrap();
    assert!(matches!(brute_force_defense(&big, 4, 4), Err(crate::Error::TooLarge(_))));
}

#[test]
fn ev_examples() {
    let tri = fixtures::complete(3);
    let zero = ev_defense(&tri, 2.0, 1.0, 0.0, 1).unwrap();
    assert!(zero.blocked.is_empty() && zero.blocked_edges.is_empty());
    assert_eq!(zero.bound, best_response_lp(&tri, &BlockSet::empty(), 1).unwrap());

    let r = ev_defense(&tri, 2.0, 1.0, 2.0, 1).unwrap();
    assert_eq!(exact_at(&tri, &r, 1), 2.0);
    let plan = EdgeNodePlan::from_result(&r, 2.0, 1.0, 2.0);
    assert!(plan.cost() <= 2.0 + 1e-9 && !plan.has_redundant_edge());
    assert_eq!(brute_force_ev_defense(&tri, 2.0, 1.0, 2.0, 1).unwrap().bound, 2.0);

    let g = gen_er(10, 0.3, 4).unwrap();
    let priced_out = ev_defense(&g, 1.0, 100.0, 2.0, 2).unwrap();
    assert!(priced_out.blocked_edges.is_empty());
    assert!((priced_out.bound - def_milp(&g, 2, 2).unwrap().bound).abs() < 1e-6);
    assert!(matches!(ev_defense(&g, 0.0, 1.0, 2.0, 2), Err(crate::Error::Parameter(_))));
}

#[test]
fn ev_model_shape() {
    let tri = fixtures::complete(3);
    let (m, v) = build_ev_milp(&tri, 1.0, 1.0, 2.0, 1, None).unwrap();
    assert_eq!(v.edges.len(), 3);
    assert_eq!(v.arcs.len(), 6);
    assert_eq!(m.num_binaries(), 3 + 2 * 3);
    let arc = Graph::from_edges(2, true, &[(0, 1)]).unwrap();
    let (_, v) = build_ev_milp(&arc, 1.0, 1.0, 1.0, 1, None).unwrap();
    assert_eq!((v.edges.len(), v.arcs.len()), (1, 1));
}

#[test]
fn json_document_keys() {
    let r = def_milp(&fixtures::star(5), 1, 1).unwrap();
    let doc: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
    for key in ["blocked_nodes", "blocked_edges", "bound", "method", "params", "iterations"] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["blocked_nodes"], serde_json::json!([0]));
}

/// Twenty seeded graphs: CG with zero gap matches the exhaustive defense.
#[test]
fn cg_matches_oracle_suite() {
    for seed in 1..=20u64 {
        let n = 6 + (seed as usize % 7);
        let g = gen_er(n, 0.3, seed).unwrap();
        let (k_d, k_a) = (1 + seed as usize % 2, 1 + seed as usize % 3);
        let oracle = brute_force_defense(&g, k_d, k_a).unwrap();
        for master in [MasterSolver::Milp, MasterSolver::Search] {
            let limits = CgLimits { master, ..CgLimits::default() };
            let cg = constraint_generation(&g, k_d, k_a, 0.0, &limits).unwrap();
            assert_eq!(cg.bound, oracle.bound, "seed {seed} {master:?}");
            assert_eq!(exact_at(&g, &cg, k_a), oracle.bound, "seed {seed} {master:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linearization_and_soundness(g in arbitrary_graph(9), k_d in 1usize..3, k_a in 1usize..3) {
        let (m, vars) = build_def_milp(&g, k_d, k_a, None).unwrap();
        let r = solve_milp(&m, &Default::default());
        prop_assert!(r.has_solution());
        for i in 0..g.n() {
            let x = r.values[vars.x[i].unwrap().0];
            let q = r.values[vars.q[i].0];
            let w = r.values[vars.w[i].unwrap().0];
            prop_assert!((w - (1.0 - x.round()) * q).abs() <= 1e-5, "node {i}: w {w}, q {q}, x {x}");
        }
        let d = def_milp(&g, k_d, k_a).unwrap();
        prop_assert!(d.bound + 1e-9 >= exact_at(&g, &d, k_a));
    }

    #[test]
    fn weighted_soundness(g in arbitrary_graph(8), w in prop::collection::vec(any::<u8>(), 1..8), k_a in 1usize..3) {
        let g = with_random_weights(g, &w);
        let d = def_milp(&g, 1, k_a).unwrap();
        prop_assert!(d.bound + 1e-9 >= exact_at(&g, &d, k_a));
        let oracle = brute_force_defense(&g, 1, k_a).unwrap();
        for master in [MasterSolver::Milp, MasterSolver::Search] {
            let limits = CgLimits { master, ..CgLimits::default() };
            let cg = constraint_generation(&g, 1, k_a, 0.0, &limits).unwrap();
            prop_assert!((cg.bound - oracle.bound).abs() < 1e-9);
        }
    }

    #[test]
    fn cg_gap_and_master_monotone(
        g in arbitrary_graph(9),
        k_d in 1usize..3,
        k_a in 1usize..3,
        gap in 0usize..4,
        search in any::<bool>(),
    ) {
        let oracle = brute_force_defense(&g, k_d, k_a).unwrap();
        let master = if search { MasterSolver::Search } else { MasterSolver::Milp };
        let limits = CgLimits { master, ..CgLimits::default() };
        let cg = constraint_generation(&g, k_d, k_a, gap as f64, &limits).unwrap();
        prop_assert!(cg.bound <= oracle.bound + gap as f64 + 1e-9);
        prop_assert!(cg.bound + 1e-9 >= oracle.bound);
        for pair in cg.iterations.windows(2) {
            prop_assert!(pair[1].master_value + 1e-9 >= pair[0].master_value);
        }
        for it in &cg.iterations {
            prop_assert!(it.master_value <= oracle.bound + 1e-6);
        }
        if gap == 0 {
            let last = cg.iterations.last().unwrap();
            prop_assert!((last.master_value - oracle.bound).abs() < 1e-6);
        }
    }

    #[test]
    fn master_search_matches_master_milp(
        g in arbitrary_graph(9),
        w in prop::collection::vec(any::<u8>(), 1..9),
        attacks in prop::collection::vec(prop::collection::btree_set(0usize..9, 1..4), 1..6),
        k_d in 1usize..4,
    ) {
        let g = if w[0] % 2 == 0 { g } else { with_random_weights(g, &w) };
        let k_d = k_d.min(g.n());
        let mut pool = CutPool::new(&g, k_d);
        for a in &attacks {
            let a: Vec<usize> = a.iter().copied().filter(|&v| v < g.n()).collect();
            if !a.is_empty() && !pool.contains(&a) {
                pool.add(&g, &a);
            }
        }
        prop_assume!(!pool.is_empty());
        let milp = solve_milp(&pool.model(&g), &Default::default());
        let (value, blocked, finished) = pool.solve_exact(&g, &vec![false; g.n()], false, None);
        prop_assert!(finished);
        prop_assert!(blocked.iter().filter(|&&b| b).count() <= k_d);
        prop_assert!((pool.evaluate(&g, &blocked).0 - value).abs() < 1e-9);
        prop_assert!((milp.objective - value).abs() < 1e-6, "milp {} search {}", milp.objective, value);
    }

    #[test]
    fn defense_value_monotone_in_budget(g in arbitrary_graph(8), k_a in 1usize..3) {
        let values: Vec<f64> = (0..3).map(|k| brute_force_defense(&g, k, k_a).unwrap().bound).collect();
        prop_assert!(values.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn ev_plans_are_clean(g in arbitrary_graph(6), c_n in 1u8..3, b_d in 0u8..4) {
        let (c_n, b_d) = (f64::from(c_n), f64::from(b_d));
        let r = ev_defense(&g, c_n, 1.0, b_d, 1).unwrap();
        let plan = EdgeNodePlan::from_result(&r, c_n, 1.0, b_d);
        prop_assert!(plan.cost() <= b_d + 1e-9);
        prop_assert!(!plan.has_redundant_edge());
        prop_assert!(r.bound + 1e-9 >= exact_at(&g, &r, 1));
    }

    #[test]
    fn exact_defense_is_at_most_milp_bound(g in arbitrary_graph(8), k_a in 1usize..3) {
        let d = def_milp(&g, 1, k_a).unwrap();
        let oracle = brute_force_defense(&g, 1, k_a).unwrap();
        prop_assert!(oracle.bound <= d.bound + 1e-9);
        let exact = best_response_milp(&g, &d.blocked, k_a).unwrap().value;
        prop_assert!(exact + 1e-9 >= oracle.bound);
    }
}
