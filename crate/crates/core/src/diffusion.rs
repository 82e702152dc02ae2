//! Cascade models and live-edge Monte Carlo.
//!
//! Independent cascade and linear threshold both have a live-edge form: draw
//! a random subgraph once, and the activated set of any seed set is what the
//! seeds reach in it. A [`LiveEdgeSampleSet`] holds `R` such draws so that
//! many seed sets can be compared on common random numbers.

use std::collections::VecDeque;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::param;
use crate::rng::{self, ids, StreamRng};
use crate::{Error, Graph, Result};

pub const DEFAULT_EVAL_REPLICAS: usize = 1000;
pub const DEFAULT_GREEDY_REPLICAS: usize = 200;
pub const DEFAULT_CENTRALITY_REPLICAS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DiffusionModel {
    /// Every arc fires with the same probability.
    Uic { p: f64 },
    /// Arc `u -> v` fires with probability `1 / deg(v)`.
    Wic,
    /// Linear threshold with weight `1 / indeg(v)` on each arc into `v`.
    Lt,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSpec {
    pub model: DiffusionModel,
    pub replicas: usize,
    pub seed: u64,
}

impl DiffusionSpec {
    pub fn new(model: DiffusionModel, replicas: usize, seed: u64) -> Result<DiffusionSpec> {
        let spec = DiffusionSpec { model, replicas, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return param("diffusion needs at least one replica");
        }
        if let DiffusionModel::Uic { p } = self.model {
            if !(0.0..=1.0).contains(&p) {
                return param(format!("cascade probability {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    /// Same model and seed with a different replica count.
    pub fn with_replicas(self, replicas: usize) -> DiffusionSpec {
        DiffusionSpec { replicas, ..self }
    }
}

/// Firing probability of arc `u -> v` under a cascade model. For the
/// threshold model this is the arc's weight.
pub fn edge_probability(g: &Graph, model: DiffusionModel, _u: usize, v: usize) -> f64 {
    match model {
        DiffusionModel::Uic { p } => p,
        DiffusionModel::Wic | DiffusionModel::Lt => {
            let d = g.in_degree(v);
            if d == 0 {
                0.0
            } else {
                1.0 / d as f64
            }
        }
    }
}

/// One live-edge realization as a compressed out-adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiveEdgeSample {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl LiveEdgeSample {
    fn from_arcs(n: usize, arcs: &mut [(u32, u32)]) -> LiveEdgeSample {
        arcs.sort_unstable();
        let mut offsets = vec![0u32; n + 1];
        for &(u, _) in arcs.iter() {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        LiveEdgeSample { offsets, targets: arcs.iter().map(|&(_, v)| v).collect() }
    }

    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_arcs(&self) -> usize {
        self.targets.len()
    }

    pub fn out(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u] as usize..self.offsets[u + 1] as usize]
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| self.out(u).iter().map(move |&v| (u, v as usize)))
    }
}

/// Where a sample set came from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub spec: DiffusionSpec,
    pub graph_hash: u64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiveEdgeSampleSet {
    provenance: Provenance,
    samples: Vec<LiveEdgeSample>,
}

fn sample_one(g: &Graph, spec: &DiffusionSpec, replica: usize) -> LiveEdgeSample {
    let mut rng = rng::stream(rng::derive(spec.seed, ids::LIVE_EDGE), replica as u64);
    let n = g.n();
    let mut arcs: Vec<(u32, u32)> = Vec::new();
    match spec.model {
        DiffusionModel::Lt => {
            for v in 0..n {
                let ins = g.in_neighbors(v);
                if !ins.is_empty() {
                    let u = ins[rng.random_range(0..ins.len())];
                    arcs.push((u as u32, v as u32));
                }
            }
        }
        model => {
            for (u, v) in g.arcs() {
                let p = edge_probability(g, model, u, v);
                if rng.random::<f64>() < p {
                    arcs.push((u as u32, v as u32));
                }
            }
        }
    }
    LiveEdgeSample::from_arcs(n, &mut arcs)
}

/// Draw `spec.replicas` live-edge graphs. Replica `r` uses its own stream
/// derived from `(spec.seed, r)`, so the result does not depend on the
/// number of worker threads.
pub fn sample_live_edges(g: &Graph, spec: &DiffusionSpec) -> Result<LiveEdgeSampleSet> {
    spec.validate()?;
    let samples = (0..spec.replicas).into_par_iter().map(|r| sample_one(g, spec, r)).collect();
    Ok(LiveEdgeSampleSet {
        provenance: Provenance { spec: *spec, graph_hash: g.content_hash(), n: g.n() },
        samples,
    })
}

/// Reusable breadth-first search buffers over one node universe.
#[derive(Clone, Debug)]
pub struct Reach {
    stamp: Vec<u32>,
    epoch: u32,
    queue: VecDeque<usize>,
}

impl Reach {
    pub fn new(n: usize) -> Reach {
        Reach { stamp: vec![0; n], epoch: 0, queue: VecDeque::new() }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Visit every node reachable from `seeds`, calling `f` once per node.
    pub fn run(&mut self, sample: &LiveEdgeSample, seeds: &[usize], mut f: impl FnMut(usize)) {
        self.next_epoch();
        let e = self.epoch;
        self.queue.clear();
        for &s in seeds {
            if self.stamp[s] != e {
                self.stamp[s] = e;
                f(s);
                self.queue.push_back(s);
            }
        }
        while let Some(u) = self.queue.pop_front() {
            for &v in sample.out(u) {
                let v = v as usize;
                if self.stamp[v] != e {
                    self.stamp[v] = e;
                    f(v);
                    self.queue.push_back(v);
                }
            }
        }
    }

    /// Whether `v` was visited by the last run.
    pub fn is_marked(&self, v: usize) -> bool {
        self.stamp[v] == self.epoch
    }
}

impl LiveEdgeSampleSet {
    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn samples(&self) -> &[LiveEdgeSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn n(&self) -> usize {
        self.provenance.n
    }

    /// Fail unless the set was drawn from `g`.
    pub fn check(&self, g: &Graph) -> Result<()> {
        if self.provenance.n != g.n() || self.provenance.graph_hash != g.content_hash() {
            return Err(Error::Usage(format!(
                "live-edge samples were drawn from a different graph (hash {:016x}, graph {:016x})",
                self.provenance.graph_hash,
                g.content_hash()
            )));
        }
        Ok(())
    }

    fn check_seeds(&self, seeds: &[usize]) -> Result<()> {
        match seeds.iter().find(|&&s| s >= self.n()) {
            Some(s) => Err(Error::Usage(format!("seed {s} outside the sampled graph of {} nodes", self.n()))),
            None => Ok(()),
        }
    }

    /// Activated value per replica: node count, or weight sum when
    /// `weights` is given.
    pub fn per_replica(&self, seeds: &[usize], weights: Option<&[f64]>) -> Result<Vec<f64>> {
        self.check_seeds(seeds)?;
        if let Some(w) = weights {
            if w.len() != self.n() {
                return Err(Error::Dimension { expected: self.n(), actual: w.len() });
            }
        }
        let n = self.n();
        Ok(self
            .samples
            .par_iter()
            .map_init(
                || Reach::new(n),
                |reach, s| {
                    let mut total = 0.0;
                    match weights {
                        Some(w) => reach.run(s, seeds, |v| total += w[v]),
                        None => reach.run(s, seeds, |_| total += 1.0),
                    }
                    total
                },
            )
            .collect())
    }

    /// Sum over replicas of the number of activated nodes.
    pub fn total_count(&self, seeds: &[usize]) -> Result<u64> {
        Ok(self.per_replica(seeds, None)?.iter().map(|&c| c as u64).sum())
    }
}

/// Nodes activated from `seeds` in one realization, sorted.
pub fn spread_on_sample(sample: &LiveEdgeSample, seeds: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    Reach::new(sample.n()).run(sample, seeds, |v| out.push(v));
    out.sort_unstable();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_values(values: &[f64]) -> Estimate {
        let r = values.len() as f64;
        let mean = values.iter().sum::<f64>() / r;
        if values.len() < 2 {
            return Estimate { mean, stderr: 0.0 };
        }
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
        Estimate { mean, stderr: (var / r).sqrt() }
    }
}

/// Expected (weighted) spread of `seeds` on `g`, estimated on `samples`.
pub fn estimate_influence(
    g: &Graph,
    samples: &LiveEdgeSampleSet,
    seeds: &[usize],
    weights: Option<&[f64]>,
) -> Result<Estimate> {
    samples.check(g)?;
    Ok(Estimate::from_values(&samples.per_replica(seeds, weights)?))
}

fn check_direct_seeds(g: &Graph, seeds: &[usize]) -> Result<()> {
    match seeds.iter().find(|&&s| s >= g.n()) {
        Some(s) => param(format!("seed {s} out of range for {} nodes", g.n())),
        None => Ok(()),
    }
}

/// One run of the independent cascade: each newly active node gets a single
/// chance to activate each inactive out-neighbor.
pub fn simulate_ic(
    g: &Graph,
    seeds: &[usize],
    p: impl Fn(usize, usize) -> f64,
    rng: &mut StreamRng,
) -> Result<Vec<usize>> {
    check_direct_seeds(g, seeds)?;
    let mut active = vec![false; g.n()];
    let mut frontier: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            frontier.push_back(s);
        }
    }
    while let Some(u) = frontier.pop_front() {
        for &v in g.out_neighbors(u) {
            if !active[v] && rng.random::<f64>() < p(u, v) {
                active[v] = true;
                frontier.push_back(v);
            }
        }
    }
    Ok((0..g.n()).filter(|&v| active[v]).collect())
}

/// One run of the linear threshold model with weights `1 / indeg(v)` and
/// thresholds drawn uniformly per run.
pub fn simulate_lt(g: &Graph, seeds: &[usize], rng: &mut StreamRng) -> Result<Vec<usize>> {
    check_direct_seeds(g, seeds)?;
    let n = g.n();
    let theta: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let mut active = vec![false; n];
    let mut pressure = vec![0.0; n];
    let mut frontier: VecDeque<usize> = VecDeque::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            frontier.push_back(s);
        }
    }
    while let Some(u) = frontier.pop_front() {
        for &v in g.out_neighbors(u) {
            if active[v] {
                continue;
            }
            pressure[v] += 1.0 / g.in_degree(v) as f64;
            if pressure[v] >= theta[v] {
                active[v] = true;
                frontier.push_back(v);
            }
        }
    }
    Ok((0..n).filter(|&v| active[v]).collect())
}

/// Mean and stderr of direct simulation over `runs` independent runs.
pub fn simulate_mean(g: &Graph, seeds: &[usize], model: DiffusionModel, runs: usize, seed: u64) -> Result<Estimate> {
    if runs == 0 {
        return param("need at least one simulation run");
    }
    let base = rng::derive(seed, ids::SIMULATION);
    let sizes: Result<Vec<f64>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(base, r as u64);
            let act = match model {
                DiffusionModel::Lt => simulate_lt(g, seeds, &mut rng)?,
                m => simulate_ic(g, seeds, |u, v| edge_probability(g, m, u, v), &mut rng)?,
            };
            Ok(act.len() as f64)
        })
        .collect();
    Ok(Estimate::from_values(&sizes?))
}
