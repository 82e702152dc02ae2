use std::collections::BTreeSet;

use rand::Rng;

use super::Graph;
use crate::error::{param, Result};
use crate::rng::{self, ids};

/// Erdős–Rényi G(n, p): every unordered pair independently with probability `p`.
pub fn gen_er(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return param("ER graph needs at least one node");
    }
    if !(0.0..=1.0).contains(&p) {
        return param(format!("edge probability {p} outside [0, 1]"));
    }
    let mut rng = rng::stream(seed, ids::GENERATOR);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, false, &edges)
}

/// Watts–Strogatz small world: each node joined to its `k` ring successors,
/// then every lattice edge `(u, u + j)` rewired with probability `beta` to a
/// uniformly random endpoint that creates neither a loop nor a duplicate.
pub fn gen_ws(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph> {
    if k == 0 || k >= n {
        return param(format!("ring degree k = {k} must satisfy 1 <= k < n = {n}"));
    }
    if !(0.0..=1.0).contains(&beta) {
        return param(format!("rewiring probability {beta} outside [0, 1]"));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    let mut rng = rng::stream(seed, ids::GENERATOR);
    for j in 1..=k {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() >= beta {
                continue;
            }
            // The edge may already have been moved away by an earlier rewiring.
            if !adj[u].contains(&v) || adj[u].len() + 1 >= n {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges: Vec<_> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, s)| s.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
        .collect();
    Graph::from_edges(n, false, &edges)
}

/// Barabási–Albert preferential attachment seeded with an `m`-clique; each
/// arriving node links to `m` distinct existing nodes chosen proportionally
/// to degree.
pub fn gen_ba(n: usize, m: usize, seed: u64) -> Result<Graph> {
    if m == 0 || m >= n {
        return param(format!("links per node m = {m} must satisfy 1 <= m < n = {n}"));
    }
    let mut edges = Vec::with_capacity(m * (m - 1) / 2 + m * (n - m));
    // Every edge endpoint appears once, so uniform draws are degree-proportional.
    let mut endpoints: Vec<usize> = Vec::new();
    for u in 0..m {
        for v in u + 1..m {
            edges.push((u, v));
            endpoints.push(u);
            endpoints.push(v);
        }
    }
    let mut rng = rng::stream(seed, ids::GENERATOR);
    let mut chosen = BTreeSet::new();
    for v in m..n {
        chosen.clear();
        while chosen.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..v)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            chosen.insert(t);
        }
        for &t in &chosen {
            edges.push((t, v));
            endpoints.push(t);
            endpoints.push(v);
        }
    }
    Graph::from_edges(n, false, &edges)
}

/// Node values drawn independently from U[0, 1).
pub fn uniform_weights(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, ids::WEIGHTS);
    (0..n).map(|_| rng.random::<f64>()).collect()
}
