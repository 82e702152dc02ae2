//! Graph representation, generators, sampling, loading, blocking views,
//! domination primitives and structural centralities.
//!
//! A [`Graph`] is immutable once built: neighbor lists are sorted, there are
//! no self-loops or parallel edges, and undirected graphs store both arc
//! directions so `in_neighbors == out_neighbors`.

mod centrality;
mod generators;
mod io;
mod sample;

pub use centrality::{betweenness, centrality, degree_centrality, pagerank, Centrality};
pub use generators::{gen_ba, gen_er, gen_ws, uniform_weights};
pub use io::{load_edge_list, load_edge_list_path, load_weight_table, GraphDoc, LoadReport};
pub use sample::{forest_fire_sample, DEFAULT_FORWARD_BURN};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::Fnv64;

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    directed: bool,
    out_adj: Vec<Vec<usize>>,
    in_adj: Vec<Vec<usize>>,
    weights: Vec<f64>,
    labels: Vec<String>,
}

/// Edges discarded while building a graph from raw input.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Dropped {
    pub self_loops: usize,
    pub duplicates: usize,
}

impl Graph {
    /// Build a simple graph; self-loops and repeated edges are errors.
    pub fn from_edges(n: usize, directed: bool, edges: &[(usize, usize)]) -> Result<Graph> {
        let (g, dropped) = Self::from_edges_lossy(n, directed, edges)?;
        if dropped.self_loops > 0 {
            return param("self-loops are not allowed");
        }
        if dropped.duplicates > 0 {
            return param("parallel edges are not allowed");
        }
        Ok(g)
    }

    /// Build a simple graph, dropping self-loops and repeated edges.
    pub fn from_edges_lossy(
        n: usize,
        directed: bool,
        edges: &[(usize, usize)],
    ) -> Result<(Graph, Dropped)> {
        let mut dropped = Dropped::default();
        let mut out_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return param(format!("edge ({u}, {v}) out of range for {n} nodes"));
            }
            if u == v {
                dropped.self_loops += 1;
                continue;
            }
            let fresh = out_sets[u].insert(v);
            if !directed {
                out_sets[v].insert(u);
            }
            if !fresh {
                dropped.duplicates += 1;
            }
        }
        let out_adj: Vec<Vec<usize>> = out_sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let in_adj = if directed {
            let mut in_adj = vec![Vec::new(); n];
            for (u, nbrs) in out_adj.iter().enumerate() {
                for &v in nbrs {
                    in_adj[v].push(u);
                }
            }
            in_adj
        } else {
            out_adj.clone()
        };
        let g = Graph {
            directed,
            out_adj,
            in_adj,
            weights: vec![1.0; n],
            labels: (0..n).map(|i| i.to_string()).collect(),
        };
        Ok((g, dropped))
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Graph> {
        if weights.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), actual: weights.len() });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return param(format!("node weight {w} must be finite and nonnegative"));
        }
        self.weights = weights;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Graph> {
        if labels.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), actual: labels.len() });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.out_adj.len()
    }

    /// Edge count: unordered pairs when undirected, arcs when directed.
    pub fn m(&self) -> usize {
        let arcs: usize = self.out_adj.iter().map(Vec::len).sum();
        if self.directed {
            arcs
        } else {
            arcs / 2
        }
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_neighbors(&self, v: usize) -> &[usize] {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &[usize] {
        &self.in_adj[v]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out_adj[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_adj[v].len()
    }

    pub fn weight(&self, v: usize) -> f64 {
        self.weights[v]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn has_unit_weights(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_adj[u].binary_search(&v).is_ok()
    }

    /// Edges in canonical order; undirected edges once with `u < v`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m());
        for (u, nbrs) in self.out_adj.iter().enumerate() {
            for &v in nbrs {
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Every arc `u -> v`; undirected edges contribute both directions.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_adj.iter().enumerate().flat_map(|(u, nbrs)| nbrs.iter().map(move |&v| (u, v)))
    }

    /// Structural hash of nodes, orientation, edges and weights.
    pub fn content_hash(&self) -> u64 {
        let mut h = Fnv64::default();
        h.write_u64(self.n() as u64);
        h.write_u64(self.directed as u64);
        for (u, v) in self.arcs() {
            h.write_u64(u as u64);
            h.write_u64(v as u64);
        }
        for w in &self.weights {
            h.write_u64(w.to_bits());
        }
        h.finish()
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return param(format!("node {v} out of range for {} nodes", self.n()));
        }
        Ok(())
    }

    /// Induced subgraph on `keep` (any order; duplicates ignored). Nodes keep
    /// their relative order, labels and weights.
    pub fn induced(&self, keep: &[usize]) -> Result<Subgraph> {
        let mut position = vec![None; self.n()];
        for &v in keep {
            self.check_node(v)?;
            position[v] = Some(0);
        }
        let mut original = Vec::new();
        for (v, slot) in position.iter_mut().enumerate() {
            if slot.is_some() {
                *slot = Some(original.len());
                original.push(v);
            }
        }
        let mut edges = Vec::new();
        for (new_u, &u) in original.iter().enumerate() {
            for &v in &self.out_adj[u] {
                if let Some(new_v) = position[v] {
                    if self.directed || new_u < new_v {
                        edges.push((new_u, new_v));
                    }
                }
            }
        }
        let graph = Graph::from_edges(original.len(), self.directed, &edges)?
            .with_weights(original.iter().map(|&v| self.weights[v]).collect())?
            .with_labels(original.iter().map(|&v| self.labels[v].clone()).collect())?;
        Ok(Subgraph { graph, original, position })
    }

    /// Copy of the graph with the given edges removed (orientation-insensitive
    /// when undirected).
    pub fn without_edges(&self, removed: &[(usize, usize)]) -> Result<Graph> {
        let mut cut = BTreeSet::new();
        for &(u, v) in removed {
            self.check_node(u)?;
            self.check_node(v)?;
            if self.directed {
                cut.insert((u, v));
            } else {
                cut.insert((u.min(v), u.max(v)));
            }
        }
        let kept: Vec<_> = self.edges().into_iter().filter(|e| !cut.contains(e)).collect();
        Graph::from_edges(self.n(), self.directed, &kept)?
            .with_weights(self.weights.clone())?
            .with_labels(self.labels.clone())
    }
}

/// An induced subgraph together with its node correspondence.
#[derive(Clone, Debug)]
pub struct Subgraph {
    pub graph: Graph,
    original: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl Subgraph {
    pub fn to_original(&self, v: usize) -> usize {
        self.original[v]
    }

    pub fn from_original(&self, v: usize) -> Option<usize> {
        self.position.get(v).copied().flatten()
    }

    /// New index -> original index.
    pub fn original_ids(&self) -> &[usize] {
        &self.original
    }

    pub fn map_to_original(&self, nodes: &[usize]) -> Vec<usize> {
        nodes.iter().map(|&v| self.original[v]).collect()
    }
}

fn canonical(nodes: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut v: Vec<usize> = nodes.into_iter().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// The defender's decision: nodes removed from the graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSet {
    blocked: Vec<usize>,
    budget: usize,
}

impl BlockSet {
    pub fn new(blocked: impl IntoIterator<Item = usize>, budget: usize) -> Result<BlockSet> {
        let blocked = canonical(blocked);
        if blocked.len() > budget {
            return param(format!("{} blocked nodes exceed budget {budget}", blocked.len()));
        }
        Ok(BlockSet { blocked, budget })
    }

    /// A block set whose budget is exactly its size.
    pub fn exact(blocked: impl IntoIterator<Item = usize>) -> BlockSet {
        let blocked = canonical(blocked);
        let budget = blocked.len();
        BlockSet { blocked, budget }
    }

    pub fn empty() -> BlockSet {
        BlockSet::default()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.blocked
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.blocked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocked.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.blocked.binary_search(&v).is_ok()
    }

    /// Indicator vector over `n` nodes.
    pub fn mask(&self, n: usize) -> Result<Vec<bool>> {
        let mut mask = vec![false; n];
        for &v in &self.blocked {
            if v >= n {
                return param(format!("blocked node {v} out of range for {n} nodes"));
            }
            mask[v] = true;
        }
        Ok(mask)
    }
}

/// The attacker's decision: initial seeds of the diffusion.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    seeds: Vec<usize>,
    budget: usize,
}

impl SeedSet {
    pub fn new(seeds: impl IntoIterator<Item = usize>, budget: usize) -> Result<SeedSet> {
        let seeds = canonical(seeds);
        if seeds.len() > budget {
            return param(format!("{} seeds exceed budget {budget}", seeds.len()));
        }
        Ok(SeedSet { seeds, budget })
    }

    pub fn exact(seeds: impl IntoIterator<Item = usize>) -> SeedSet {
        let seeds = canonical(seeds);
        let budget = seeds.len();
        SeedSet { seeds, budget }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.seeds
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    /// Error unless every seed is a node of an `n`-node graph and none is blocked.
    pub fn check_against(&self, n: usize, blocked: &BlockSet) -> Result<()> {
        if let Some(&v) = self.seeds.iter().find(|&&v| v >= n) {
            return param(format!("seed {v} out of range for {n} nodes"));
        }
        if let Some(&v) = self.seeds.iter().find(|&&v| blocked.contains(v)) {
            return Err(Error::Usage(format!("seed {v} is blocked")));
        }
        Ok(())
    }
}

/// Remove the blocked nodes, returning the remaining graph and index maps.
pub fn block(g: &Graph, s: &BlockSet) -> Result<Subgraph> {
    let mask = s.mask(g.n())?;
    let keep: Vec<usize> = (0..g.n()).filter(|&v| !mask[v]).collect();
    g.induced(&keep)
}

/// Nodes whose seeding dominates `i`: `i` and its in-neighbors.
pub fn dominators(g: &Graph, i: usize) -> Result<Vec<usize>> {
    g.check_node(i)?;
    Ok(dominators_unchecked(g, i))
}

pub(crate) fn dominators_unchecked(g: &Graph, i: usize) -> Vec<usize> {
    let mut d = Vec::with_capacity(g.in_degree(i) + 1);
    d.extend_from_slice(g.in_neighbors(i));
    let at = d.binary_search(&i).unwrap_err();
    d.insert(at, i);
    d
}

/// Nodes dominated by seeding `v`: `v` and its out-neighbors.
pub(crate) fn dominated_by(g: &Graph, v: usize) -> Vec<usize> {
    let mut d = Vec::with_capacity(g.out_degree(v) + 1);
    d.extend_from_slice(g.out_neighbors(v));
    let at = d.binary_search(&v).unwrap_err();
    d.insert(at, v);
    d
}

/// Union of closed out-neighborhoods of `seeds`, sorted.
pub fn dominated_set(g: &Graph, seeds: &[usize]) -> Result<Vec<usize>> {
    let mut hit = vec![false; g.n()];
    for &v in seeds {
        g.check_node(v)?;
        hit[v] = true;
        for &u in g.out_neighbors(v) {
            hit[u] = true;
        }
    }
    Ok((0..g.n()).filter(|&v| hit[v]).collect())
}

/// Node counts of connected components (weak connectivity when directed),
/// sorted descending.
pub fn component_sizes(g: &Graph) -> Vec<usize> {
    let n = g.n();
    let mut seen = vec![false; n];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        stack.push(s);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for &u in g.out_neighbors(v).iter().chain(g.in_neighbors(v)) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

pub fn is_connected(g: &Graph) -> bool {
    component_sizes(g).len() <= 1
}

/// Small named graphs used throughout tests and examples.
pub mod fixtures {
    use super::Graph;

    /// Star with center 0 and leaves `1..n`.
    pub fn star(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|v| (0, v)).collect();
        Graph::from_edges(n, false, &edges).expect("valid star")
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        Graph::from_edges(n, false, &edges).expect("valid path")
    }

    pub fn cycle(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
        Graph::from_edges(n, false, &edges).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Graph::from_edges(n, false, &edges).expect("valid clique")
    }
}
