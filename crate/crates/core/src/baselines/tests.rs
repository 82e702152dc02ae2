use proptest::prelude::*;

use super::*;
use crate::adversary::celf_im;
use crate::diffusion::{DiffusionModel, DiffusionSpec};
use crate::netgraph::{fixtures, gen_ba, gen_er};

fn uic(p: f64, replicas: usize, seed: u64) -> DiffusionSpec {
    DiffusionSpec::new(DiffusionModel::Uic { p }, replicas, seed).unwrap()
}

#[test]
fn centrality_examples() {
    let star = fixtures::star(5);
    assert_eq!(centrality_defense(&star, 1, CentralityKind::Degree, None).unwrap().nodes(), &[0]);
    let c4 = fixtures::cycle(4);
    assert_eq!(centrality_defense(&c4, 2, CentralityKind::PageRank, None).unwrap().nodes(), &[0, 1]);
    let samples = sample_live_edges(&star, &uic(1.0, 10, 1)).unwrap();
    // Undirected, every leaf reaches the hub and through it the rest.
    assert_eq!(influence_scores(&star, &samples).unwrap(), vec![5.0; 5]);
    assert_eq!(centrality_defense(&star, 1, CentralityKind::Influence, Some(&samples)).unwrap().nodes(), &[0]);
    let out_star = Graph::from_edges(5, true, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
    let samples = sample_live_edges(&out_star, &uic(1.0, 10, 1)).unwrap();
    assert_eq!(influence_scores(&out_star, &samples).unwrap(), vec![5.0, 1.0, 1.0, 1.0, 1.0]);
    assert!(matches!(
        centrality_defense(&star, 1, CentralityKind::Influence, None),
        Err(crate::Error::Parameter(_))
    ));
    let other = sample_live_edges(&fixtures::path(5), &uic(1.0, 10, 1)).unwrap();
    assert!(centrality_defense(&star, 1, CentralityKind::Influence, Some(&other)).is_err());
}

#[test]
fn im_examples() {
    let star = fixtures::star(5);
    assert_eq!(im_defense(&star, 1, &sample_live_edges(&star, &uic(1.0, 10, 1)).unwrap()).unwrap().nodes(), &[0]);
    let silent = sample_live_edges(&star, &uic(0.0, 10, 1)).unwrap();
    assert_eq!(im_defense(&star, 3, &silent).unwrap().nodes(), &[0, 1, 2]);
    let g = gen_er(30, 0.1, 42).unwrap();
    let samples = sample_live_edges(&g, &uic(0.1, 200, 7)).unwrap();
    let attacker = celf_im(&g, &samples, 3).unwrap();
    assert_eq!(im_defense(&g, 3, &samples).unwrap().nodes(), attacker.seeds.nodes());
}

#[test]
fn greedy_blocking_examples() {
    let star = fixtures::star(5);
    assert_eq!(greedy_blocking_defense(&star, 1, &[0], &uic(1.0, 20, 1)).unwrap().nodes(), &[1]);
    let path = fixtures::path(4);
    assert_eq!(greedy_blocking_defense(&path, 1, &[0], &uic(1.0, 20, 1)).unwrap().nodes(), &[1]);
    let g = gen_er(15, 0.2, 3).unwrap();
    assert_eq!(greedy_blocking_defense(&g, 3, &[4, 9], &uic(0.0, 20, 1)).unwrap().nodes(), &[0, 1, 2]);
    assert!(matches!(
        greedy_blocking_defense(&star, 5, &[0], &uic(1.0, 20, 1)),
        Err(crate::Error::Parameter(_))
    ));
}

#[test]
fn wdom_and_random_examples() {
    assert_eq!(wdom_defense(&fixtures::star(5), 1).nodes(), &[0]);
    let g = gen_ba(20, 2, 4).unwrap();
    assert_eq!(random_defense(&g, 20, 3).nodes(), (0..20).collect::<Vec<_>>().as_slice());
    assert_eq!(random_defense(&g, 6, 9), random_defense(&g, 6, 9));
    assert_ne!(random_defense(&g, 6, 9), random_defense(&g, 6, 10));
}

#[test]
fn names_round_trip() {
    for b in Baseline::ALL {
        assert_eq!(Baseline::parse(b.name()).unwrap(), b);
        let json = serde_json::to_string(&b).unwrap();
        assert_eq!(json, format!("\"{}\"", b.name()));
    }
    assert!(Baseline::parse("oracle").is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn every_baseline_blocks_min_k_nodes(n in 4usize..18, p in 0.05..0.5f64, seed in 0u64..1000, k_d in 0usize..22) {
        let g = gen_er(n, p, seed).unwrap();
        let ctx = BaselineContext { spec: uic(0.2, 30, seed), k_a: 2, seed };
        for b in Baseline::ALL {
            let k = if b == Baseline::GreedyBlocking { k_d.min(n - 2) } else { k_d };
            let first = run_baseline(&g, k, b, &ctx).unwrap();
            prop_assert_eq!(first.len(), k.min(n), "{:?}", b);
            prop_assert_eq!(&first, &run_baseline(&g, k, b, &ctx).unwrap());
        }
    }

    #[test]
    fn degree_with_strict_order_is_top_k(extra in prop::collection::vec(0usize..6, 1..6), k_d in 1usize..4) {
        // Star of stars with distinct hub sizes gives a strict degree order
        // among hubs, all above the leaves.
        let mut edges = Vec::new();
        let mut next = extra.len();
        for (h, &e) in extra.iter().enumerate() {
            for _ in 0..(h + 2 + e * extra.len()) {
                edges.push((h, next));
                next += 1;
            }
        }
        let g = Graph::from_edges(next, false, &edges).unwrap();
        let deg: Vec<usize> = (0..g.n()).map(|v| g.out_degree(v)).collect();
        let mut order: Vec<usize> = (0..g.n()).collect();
        order.sort_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
        let k = k_d.min(extra.len());
        prop_assume!((0..k).all(|i| deg[order[i]] > deg[order[i + 1]]));
        let mut expect: Vec<usize> = order[..k].to_vec();
        expect.sort_unstable();
        let got = centrality_defense(&g, k, CentralityKind::Degree, None).unwrap();
        prop_assert_eq!(got.nodes(), expect.as_slice());
    }

    #[test]
    fn greedy_never_blocks_a_seed(seed in 0u64..500, k_d in 1usize..5) {
        let g = gen_er(14, 0.25, seed).unwrap();
        let seeds = [seed as usize % 14, (seed as usize * 7 + 3) % 14];
        let b = greedy_blocking_defense(&g, k_d, &seeds, &uic(0.3, 25, seed)).unwrap();
        prop_assert!(seeds.iter().all(|&s| !b.contains(s)));
    }
}
