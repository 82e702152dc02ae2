use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{param, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centrality {
    Degree,
    Betweenness,
    PageRank,
}

pub fn centrality(g: &Graph, kind: Centrality) -> Result<Vec<f64>> {
    if g.n() == 0 {
        return param("centrality of an empty graph");
    }
    Ok(match kind {
        Centrality::Degree => degree_centrality(g),
        Centrality::Betweenness => betweenness(g),
        Centrality::PageRank => pagerank(g, 0.85, 1e-10, 200),
    })
}

/// Out-degree (plain degree when undirected).
pub fn degree_centrality(g: &Graph) -> Vec<f64> {
    (0..g.n()).map(|v| g.out_degree(v) as f64).collect()
}

/// Unweighted shortest-path betweenness, Brandes accumulation. Undirected
/// graphs count each unordered pair once.
pub fn betweenness(g: &Graph) -> Vec<f64> {
    let n = g.n();
    let mut bc = vec![0.0; n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![usize::MAX; n];
    let mut delta = vec![0.0f64; n];
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for s in 0..n {
        for v in 0..n {
            sigma[v] = 0.0;
            dist[v] = usize::MAX;
            delta[v] = 0.0;
            preds[v].clear();
        }
        order.clear();
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.out_neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                bc[w] += delta[w];
            }
        }
    }
    if !g.is_directed() {
        bc.iter_mut().for_each(|b| *b /= 2.0);
    }
    bc
}

/// Power-iteration PageRank; dangling mass is spread uniformly. Stops when
/// the L1 change drops below `tol` or after `max_iter` sweeps.
pub fn pagerank(g: &Graph, damping: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let n = g.n();
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        let dangling: f64 = (0..n).filter(|&v| g.out_degree(v) == 0).map(|v| rank[v]).sum();
        let base = (1.0 - damping) * uniform + damping * dangling * uniform;
        next.iter_mut().for_each(|x| *x = base);
        for v in 0..n {
            let d = g.out_degree(v);
            if d > 0 {
                let share = damping * rank[v] / d as f64;
                for &u in g.out_neighbors(v) {
                    next[u] += share;
                }
            }
        }
        let change: f64 = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if change < tol {
            break;
        }
    }
    rank
}
