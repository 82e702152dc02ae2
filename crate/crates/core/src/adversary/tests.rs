use proptest::prelude::*;

use super::*;
use crate::diffusion::{sample_live_edges, DiffusionModel, DiffusionSpec};
use crate::netgraph::{fixtures, gen_ba, gen_er, gen_ws};
use crate::optikit::{solve_lp, Status};

fn none() -> BlockSet {
    BlockSet::empty()
}

#[test]
fn eval_examples() {
    let star = fixtures::star(5);
    assert_eq!(eval_f(&star, &none(), &SeedSet::exact([0])).unwrap(), 5.0);
    assert_eq!(eval_f(&star, &BlockSet::exact([0]), &SeedSet::exact([1])).unwrap(), 1.0);
    let w = star.clone().with_weights(vec![2.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
    assert_eq!(eval_f(&w, &none(), &SeedSet::exact([0])).unwrap(), 6.0);
    assert!(matches!(
        eval_f(&star, &BlockSet::exact([0]), &SeedSet::exact([0])),
        Err(crate::Error::Usage(_))
    ));
}

#[test]
fn br_milp_shape() {
    let (m, vars) = build_br_milp(&fixtures::star(5), &none(), 1).unwrap();
    assert_eq!(m.num_binaries(), 5);
    assert_eq!(m.num_vars() - m.num_binaries(), 5);
    assert_eq!(m.num_rows(), 11);
    assert_eq!(vars.y.len(), 5);
    let all = BlockSet::exact(0..5);
    let (m, _) = build_br_milp(&fixtures::star(5), &all, 1).unwrap();
    assert!(m.vars.iter().all(|v| v.obj == 0.0));
    assert_eq!(best_response_milp(&fixtures::star(5), &all, 1).unwrap().value, 0.0);
}

#[test]
fn best_response_examples() {
    let p4 = fixtures::path(4);
    let one = best_response_milp(&p4, &none(), 1).unwrap();
    assert_eq!(one.value, 3.0);
    assert!(one.seeds.nodes() == [1] || one.seeds.nodes() == [2]);
    assert_eq!(best_response_milp(&p4, &none(), 2).unwrap().value, 4.0);
    let star = fixtures::star(5);
    assert_eq!(best_response_milp(&star, &BlockSet::exact([0]), 2).unwrap().value, 2.0);
    assert_eq!(best_response_lp(&star, &none(), 1).unwrap(), 5.0);
    assert_eq!(best_response_milp(&star, &none(), 0).unwrap().value, 0.0);
}

#[test]
fn greedy_examples() {
    let star = fixtures::star(5);
    let g = greedy_kmaxvd(&star, &none(), 1).unwrap();
    assert_eq!((g.seeds.nodes(), g.value), (&[0][..], 5.0));
    assert_eq!(greedy_kmaxvd(&fixtures::path(4), &none(), 2).unwrap().value, 4.0);
}

#[test]
fn brute_force_examples() {
    let star = fixtures::star(5);
    let b = brute_force_br(&star, &none(), 1).unwrap();
    assert_eq!((b.seeds.nodes(), b.value), (&[0][..], 5.0));
    assert_eq!(brute_force_br(&fixtures::cycle(4), &none(), 1).unwrap().value, 3.0);
    let big = gen_er(60, 0.1, 1).unwrap();
    assert!(matches!(brute_force_br(&big, &none(), 5), Err(crate::Error::TooLarge(_))));
}

#[test]
fn combinations_in_order() {
    let mut seen = Vec::new();
    brute::for_each_combination(4, 2, |c| seen.push(c.to_vec()));
    assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    assert_eq!(brute::subsets_up_to(15, 3), 1 + 15 + 105 + 455);
}

#[test]
fn celf_examples() {
    let g = gen_er(30, 0.1, 42).unwrap();
    let uic = |p| DiffusionSpec::new(DiffusionModel::Uic { p }, 50, 3).unwrap();
    let zero = sample_live_edges(&g, &uic(0.0)).unwrap();
    let out = celf_im(&g, &zero, 3).unwrap();
    assert_eq!((out.seeds.nodes(), out.value), (&[0, 1, 2][..], 3.0));

    let c = fixtures::cycle(6);
    let full = sample_live_edges(&c, &uic(1.0)).unwrap();
    let out = celf_im(&c, &full, 2).unwrap();
    assert_eq!(out.value, 6.0);
    assert_eq!(out.seeds.nodes(), &[0, 1]);
}

#[test]
fn celf_matches_naive_greedy() {
    let g = gen_er(30, 0.1, 42).unwrap();
    let spec = DiffusionSpec::new(DiffusionModel::Uic { p: 0.1 }, 500, 42).unwrap();
    let s = sample_live_edges(&g, &spec).unwrap();
    let lazy = celf_im(&g, &s, 3).unwrap();
    let naive = greedy_im_naive(&g, &s, 3).unwrap();
    assert_eq!(lazy.seeds, naive.seeds);
    assert_eq!(lazy.value, naive.value);
}

#[test]
fn celf_rejects_foreign_samples() {
    let s = sample_live_edges(&fixtures::path(5), &DiffusionSpec::new(DiffusionModel::Wic, 5, 1).unwrap()).unwrap();
    assert!(celf_im(&fixtures::cycle(5), &s, 1).is_err());
}

#[test]
fn im_attack_avoids_blocked() {
    let g = gen_ba(40, 2, 4).unwrap();
    let x = BlockSet::exact([0, 1, 2]);
    let spec = DiffusionSpec::new(DiffusionModel::Wic, 100, 1).unwrap();
    let out = im_attack(&g, &x, 4, &spec).unwrap();
    assert_eq!(out.seeds.len(), 4);
    assert!(out.seeds.nodes().iter().all(|v| !x.contains(*v)));
}

/// Strong duality between the relaxed best response and its explicit dual.
#[test]
fn relaxed_best_response_dual() {
    for seed in 0..6 {
        let g = gen_ws(14, 4, 0.3, seed).unwrap();
        let x = BlockSet::exact([seed as usize % 14, 5]);
        let primal = best_response_lp(&g, &x, 3).unwrap();
        let (d, _) = build_br_dual(&g, &x, 3).unwrap();
        let dual = solve_lp(&d);
        assert_eq!(dual.status, Status::Optimal);
        assert!((primal - dual.objective).abs() <= 1e-6 * (1.0 + primal.abs()), "{primal} vs {}", dual.objective);
    }
}

fn random_graph(kind: u8, n: usize, seed: u64) -> Graph {
    match kind % 3 {
        0 => gen_er(n, 0.25, seed).unwrap(),
        1 => gen_ws(n, 4, 0.3, seed).unwrap(),
        _ => gen_ba(n, 2, seed).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oracles_agree(kind in 0u8..3, n in 5usize..12, seed in 0u64..10_000, k in 1usize..4, blocked in 0usize..3) {
        let g = random_graph(kind, n, seed);
        let x = BlockSet::exact((0..blocked).map(|i| (i * 3 + seed as usize) % n));
        let exact = brute_force_br(&g, &x, k).unwrap();
        let milp = best_response_milp(&g, &x, k).unwrap();
        prop_assert_eq!(milp.value, exact.value);
        prop_assert_eq!(milp.status, Some(Status::Optimal));
        let lp = best_response_lp(&g, &x, k).unwrap();
        let greedy = greedy_kmaxvd(&g, &x, k).unwrap().value;
        prop_assert!(lp >= milp.value - 1e-9);
        prop_assert!(milp.value >= greedy);
        prop_assert!(greedy >= (1.0 - (-1.0f64).exp()) * milp.value - 1e-9);
    }

    #[test]
    fn eval_monotonicity(n in 5usize..10, seed in 0u64..1000) {
        let g = gen_er(n, 0.3, seed).unwrap();
        let y_small = SeedSet::exact([n - 1]);
        let y_big = SeedSet::exact([n - 1, n - 2]);
        let x_small = BlockSet::exact([0]);
        let x_big = BlockSet::exact([0, 1]);
        prop_assert!(eval_f(&g, &x_small, &y_big).unwrap() >= eval_f(&g, &x_small, &y_small).unwrap());
        prop_assert!(eval_f(&g, &x_big, &y_small).unwrap() <= eval_f(&g, &x_small, &y_small).unwrap());
    }
}

#[test]
fn weighted_oracles_agree() {
    use rand::Rng;
    for seed in 0..12u64 {
        let mut rng = crate::rng::stream(seed, crate::rng::ids::WEIGHTS);
        let g = random_graph(seed as u8, 11, seed);
        let w: Vec<f64> = (0..11).map(|_| rng.random::<f64>()).collect();
        let g = g.with_weights(w).unwrap();
        let x = BlockSet::exact([seed as usize % 11]);
        let exact = brute_force_br(&g, &x, 3).unwrap();
        let milp = best_response_milp(&g, &x, 3).unwrap();
        assert!((milp.value - exact.value).abs() <= 1e-12, "{} vs {}", milp.value, exact.value);
    }
}
