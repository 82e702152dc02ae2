//! Heuristic defenses used as comparison points for the optimization-based
//! ones. Each returns `min(k_D, n)` blocked nodes and is deterministic in
//! its inputs and seed. Rankings break ties toward the lower node index.

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::celf_im;
use crate::blockade::{top_by_score, wdom_scores};
use crate::diffusion::{sample_live_edges, DiffusionSpec, LiveEdgeSample, LiveEdgeSampleSet};
use crate::error::param;
use crate::netgraph::{block, centrality, Centrality};
use crate::rng::{self, ids};
use crate::{BlockSet, Error, Graph, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CentralityKind {
    Degree,
    Betweenness,
    PageRank,
    /// Estimated spread of the node as the only seed.
    Influence,
}

/// Every comparison defense by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Baseline {
    Degree,
    Betweenness,
    #[serde(rename = "pagerank")]
    PageRank,
    Influence,
    Im,
    GreedyBlocking,
    #[serde(rename = "wdom")]
    WDom,
    Random,
}

impl Baseline {
    pub const ALL: [Baseline; 8] = [
        Baseline::Degree,
        Baseline::Betweenness,
        Baseline::PageRank,
        Baseline::Influence,
        Baseline::Im,
        Baseline::GreedyBlocking,
        Baseline::WDom,
        Baseline::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Degree => "degree",
            Baseline::Betweenness => "betweenness",
            Baseline::PageRank => "pagerank",
            Baseline::Influence => "influence",
            Baseline::Im => "im",
            Baseline::GreedyBlocking => "greedy-blocking",
            Baseline::WDom => "wdom",
            Baseline::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Result<Baseline> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown baseline defense {s:?}")))
    }
}

/// Inputs shared by the baselines that need diffusion or randomness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineContext {
    /// Cascade used by the influence, IM and greedy-blocking defenses.
    pub spec: DiffusionSpec,
    /// Attack budget assumed when picking the seeds to block against.
    pub k_a: usize,
    pub seed: u64,
}

/// Run one baseline. The influence ranking uses `spec` with
/// [`crate::diffusion::DEFAULT_CENTRALITY_REPLICAS`] replicas; IM and
/// greedy blocking use `spec` as given.
pub fn run_baseline(g: &Graph, k_d: usize, which: Baseline, ctx: &BaselineContext) -> Result<BlockSet> {
    match which {
        Baseline::Degree => centrality_defense(g, k_d, CentralityKind::Degree, None),
        Baseline::Betweenness => centrality_defense(g, k_d, CentralityKind::Betweenness, None),
        Baseline::PageRank => centrality_defense(g, k_d, CentralityKind::PageRank, None),
        Baseline::Influence => {
            let spec = ctx.spec.with_replicas(crate::diffusion::DEFAULT_CENTRALITY_REPLICAS);
            let samples = sample_live_edges(g, &spec)?;
            centrality_defense(g, k_d, CentralityKind::Influence, Some(&samples))
        }
        Baseline::Im => im_defense(g, k_d, &sample_live_edges(g, &ctx.spec)?),
        Baseline::GreedyBlocking => {
            let samples = sample_live_edges(g, &ctx.spec)?;
            let seeds = celf_im(g, &samples, ctx.k_a)?.seeds;
            let k = k_d.min(g.n() - seeds.len());
            greedy_blocking_defense(g, k, seeds.nodes(), &ctx.spec)
        }
        Baseline::WDom => Ok(wdom_defense(g, k_d)),
        Baseline::Random => Ok(random_defense(g, k_d, ctx.seed)),
    }
}

fn top_k(scores: &[f64], k_d: usize) -> BlockSet {
    let k = k_d.min(scores.len());
    BlockSet::new(top_by_score(scores, k), k).expect("ranking yields at most k distinct nodes")
}

/// Weighted spread of each node alone on `samples`.
pub fn influence_scores(g: &Graph, samples: &LiveEdgeSampleSet) -> Result<Vec<f64>> {
    samples.check(g)?;
    let w = (!g.has_unit_weights()).then(|| g.weights());
    (0..g.n())
        .map(|v| {
            let per = samples.per_replica(&[v], w)?;
            Ok(per.iter().sum::<f64>() / per.len() as f64)
        })
        .collect()
}

/// Block the `k_D` highest-ranked nodes.
pub fn centrality_defense(
    g: &Graph,
    k_d: usize,
    kind: CentralityKind,
    samples: Option<&LiveEdgeSampleSet>,
) -> Result<BlockSet> {
    let scores = match kind {
        CentralityKind::Degree => centrality(g, Centrality::Degree)?,
        CentralityKind::Betweenness => centrality(g, Centrality::Betweenness)?,
        CentralityKind::PageRank => centrality(g, Centrality::PageRank)?,
        CentralityKind::Influence => match samples {
            Some(s) => influence_scores(g, s)?,
            None => return param("the influence ranking needs a live-edge sample set"),
        },
    };
    Ok(top_k(&scores, k_d))
}

/// Block the seeds an influence maximizer with budget `k_D` would pick.
pub fn im_defense(g: &Graph, k_d: usize, samples: &LiveEdgeSampleSet) -> Result<BlockSet> {
    let k = k_d.min(g.n());
    let seeds = celf_im(g, samples, k)?.seeds;
    BlockSet::new(seeds.nodes().iter().copied(), k)
}

pub fn wdom_defense(g: &Graph, k_d: usize) -> BlockSet {
    top_k(&wdom_scores(g), k_d)
}

/// `min(k_D, n)` nodes drawn uniformly without replacement.
pub fn random_defense(g: &Graph, k_d: usize, seed: u64) -> BlockSet {
    let k = k_d.min(g.n());
    let mut rng = rng::stream(seed, ids::RANDOM_DEFENSE);
    let picked = index::sample(&mut rng, g.n(), k).into_vec();
    BlockSet::new(picked, k).expect("sampling without replacement gives distinct nodes")
}

/// Weighted count reached from `seeds` in one sample when `skip` is
/// treated as absent.
fn reach_without(sample: &LiveEdgeSample, seeds: &[usize], skip: usize, weights: &[f64], seen: &mut [bool]) -> f64 {
    let mut stack: Vec<usize> = Vec::new();
    let mut visited = Vec::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            visited.push(s);
            stack.push(s);
        }
    }
    while let Some(u) = stack.pop() {
        for &v in sample.out(u) {
            let v = v as usize;
            if v != skip && !seen[v] {
                seen[v] = true;
                visited.push(v);
                stack.push(v);
            }
        }
    }
    let mut total = 0.0;
    for v in visited {
        total += weights[v];
        seen[v] = false;
    }
    total
}

/// Greedy blocking against known seeds: each round blocks the candidate
/// whose removal cuts the seeds' estimated spread the most. Round `t`
/// draws fresh samples of the graph left after the earlier rounds, from
/// stream `t` of the spec's seed, and scores every candidate on them.
/// Seeds are never blocked.
pub fn greedy_blocking_defense(g: &Graph, k_d: usize, fixed_seeds: &[usize], spec: &DiffusionSpec) -> Result<BlockSet> {
    let mut is_seed = vec![false; g.n()];
    for &s in fixed_seeds {
        if s >= g.n() {
            return param(format!("seed {s} out of range for {} nodes", g.n()));
        }
        is_seed[s] = true;
    }
    let free = is_seed.iter().filter(|&&s| !s).count();
    if k_d > free {
        return param(format!("defense budget {k_d} exceeds the {free} nodes that are not seeds"));
    }
    let base = rng::derive(spec.seed, ids::GREEDY_BLOCKING);
    let mut blocked: Vec<usize> = Vec::with_capacity(k_d);
    for round in 0..k_d {
        let sub = block(g, &BlockSet::exact(blocked.iter().copied()))?;
        let h = &sub.graph;
        let round_spec = DiffusionSpec { seed: rng::derive(base, round as u64), ..*spec };
        let samples = sample_live_edges(h, &round_spec)?;
        let seeds: Vec<usize> = fixed_seeds.iter().map(|&s| sub.from_original(s).expect("seeds stay")).collect();
        let weights = h.weights();
        let candidates: Vec<usize> = (0..h.n()).filter(|&v| !is_seed[sub.to_original(v)]).collect();
        let spreads: Vec<f64> = candidates
            .par_iter()
            .map(|&c| {
                let mut seen = vec![false; h.n()];
                samples.samples().iter().map(|s| reach_without(s, &seeds, c, weights, &mut seen)).sum()
            })
            .collect();
        // Candidates are in increasing original order, so the first minimum
        // is the lowest index.
        let mut best = 0;
        for (i, &s) in spreads.iter().enumerate() {
            if s < spreads[best] {
                best = i;
            }
        }
        blocked.push(sub.to_original(candidates[best]));
    }
    BlockSet::new(blocked, k_d)
}

#[cfg(test)]
mod tests;
