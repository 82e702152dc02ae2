use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rayon::prelude::*;

use crate::diffusion::{sample_live_edges, DiffusionSpec, LiveEdgeSample, LiveEdgeSampleSet};
use crate::netgraph::block;
use crate::{BlockSet, Graph, Result, SeedSet};

use super::{domination_value, AttackMethod, AttackOutcome};

pub(crate) fn covered(g: &Graph, seeds: &[usize]) -> Vec<bool> {
    let mut hit = vec![false; g.n()];
    for &s in seeds {
        hit[s] = true;
        for &v in g.out_neighbors(s) {
            hit[v] = true;
        }
    }
    hit
}

/// Greedy k-MaxVD: repeatedly seed the unblocked node that newly dominates
/// the most unblocked weight (lowest index on ties).
pub fn greedy_kmaxvd(g: &Graph, x: &BlockSet, k_a: usize) -> Result<AttackOutcome> {
    let blocked = x.mask(g.n())?;
    let mut hit = vec![false; g.n()];
    let mut chosen = vec![false; g.n()];
    let mut seeds = Vec::new();
    let free = (0..g.n()).filter(|&v| !blocked[v]).count();
    let gain = |v: usize, hit: &[bool]| -> f64 {
        let mut s = 0.0;
        if !hit[v] {
            s += g.weight(v);
        }
        for &u in g.out_neighbors(v) {
            if !hit[u] && !blocked[u] {
                s += g.weight(u);
            }
        }
        s
    };
    while seeds.len() < k_a.min(free) {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..g.n()).filter(|&v| !blocked[v] && !chosen[v]) {
            let gv = gain(v, &hit);
            if best.is_none_or(|(_, b)| gv > b) {
                best = Some((v, gv));
            }
        }
        let (v, _) = best.expect("an unchosen free node exists");
        chosen[v] = true;
        hit[v] = true;
        for &u in g.out_neighbors(v) {
            hit[u] = true;
        }
        seeds.push(v);
    }
    let value = domination_value(g, &blocked, &seeds);
    Ok(AttackOutcome::plain(seeds, k_a, value, AttackMethod::GreedyMaxVd))
}

/// Per-sample activation state for greedy seed selection.
struct Spread<'a> {
    g: &'a Graph,
    samples: &'a [LiveEdgeSample],
    active: Vec<Vec<bool>>,
}

fn bfs_gain(
    sample: &LiveEdgeSample,
    active: &[bool],
    weights: &[f64],
    v: usize,
    seen: &mut Vec<bool>,
    queue: &mut VecDeque<usize>,
    commit: Option<&mut Vec<bool>>,
) -> f64 {
    if active[v] {
        return 0.0;
    }
    let mut reached = vec![v];
    seen[v] = true;
    queue.clear();
    queue.push_back(v);
    while let Some(u) = queue.pop_front() {
        for &w in sample.out(u) {
            let w = w as usize;
            if !seen[w] && !active[w] {
                seen[w] = true;
                reached.push(w);
                queue.push_back(w);
            }
        }
    }
    let mut total = 0.0;
    for &u in &reached {
        total += weights[u];
        seen[u] = false;
    }
    if let Some(act) = commit {
        for &u in &reached {
            act[u] = true;
        }
    }
    total
}

impl<'a> Spread<'a> {
    fn new(g: &'a Graph, samples: &'a LiveEdgeSampleSet) -> Spread<'a> {
        let n = g.n();
        Spread { g, samples: samples.samples(), active: vec![vec![false; n]; samples.len()] }
    }

    /// Total newly activated weight over all samples if `v` joined the seeds.
    fn gain(&self, v: usize) -> f64 {
        let n = self.g.n();
        let w = self.g.weights();
        let per: Vec<f64> = self
            .samples
            .par_iter()
            .zip(self.active.par_iter())
            .map_init(
                || (vec![false; n], VecDeque::new()),
                |(seen, queue), (s, act)| bfs_gain(s, act, w, v, seen, queue, None),
            )
            .collect();
        per.iter().sum()
    }

    fn commit(&mut self, v: usize) {
        let n = self.g.n();
        let w = self.g.weights();
        self.samples.par_iter().zip(self.active.par_iter_mut()).for_each_init(
            || (vec![false; n], VecDeque::new()),
            |(seen, queue), (s, act)| {
                let snapshot = act.clone();
                bfs_gain(s, &snapshot, w, v, seen, queue, Some(act));
            },
        );
    }
}

#[derive(Clone, Copy, Debug)]
struct Entry {
    gain: f64,
    node: usize,
    round: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain.total_cmp(&other.gain).then(other.node.cmp(&self.node))
    }
}

fn finish(g: &Graph, samples: &LiveEdgeSampleSet, seeds: Vec<usize>, k_a: usize, method: AttackMethod) -> Result<AttackOutcome> {
    let per = samples.per_replica(&seeds, Some(g.weights()))?;
    let est = crate::diffusion::Estimate::from_values(&per);
    let mut out = AttackOutcome::plain(seeds, k_a, est.mean, method);
    out.diagnostics = Some(format!("stderr {:.6} over {} replicas", est.stderr, samples.len()));
    Ok(out)
}

/// Lazy-forward greedy influence maximization on fixed live-edge samples.
///
/// `samples` must have been drawn from `g` (usually a graph with the
/// blocked nodes already removed). Picks the same seeds as
/// [`greedy_im_naive`].
pub fn celf_im(g: &Graph, samples: &LiveEdgeSampleSet, k_a: usize) -> Result<AttackOutcome> {
    samples.check(g)?;
    let mut state = Spread::new(g, samples);
    let k = k_a.min(g.n());
    let mut heap: BinaryHeap<Entry> = (0..g.n()).map(|v| Entry { gain: state.gain(v), node: v, round: 0 }).collect();
    let mut seeds = Vec::with_capacity(k);
    while seeds.len() < k {
        let top = heap.pop().expect("candidates remain");
        if top.round == seeds.len() {
            state.commit(top.node);
            seeds.push(top.node);
        } else {
            heap.push(Entry { gain: state.gain(top.node), node: top.node, round: seeds.len() });
        }
    }
    finish(g, samples, seeds, k_a, AttackMethod::Celf)
}

/// Plain greedy that re-evaluates every candidate in every round.
pub fn greedy_im_naive(g: &Graph, samples: &LiveEdgeSampleSet, k_a: usize) -> Result<AttackOutcome> {
    samples.check(g)?;
    let mut state = Spread::new(g, samples);
    let k = k_a.min(g.n());
    let mut chosen = vec![false; g.n()];
    let mut seeds = Vec::with_capacity(k);
    while seeds.len() < k {
        let mut best: Option<(usize, f64)> = None;
        for v in (0..g.n()).filter(|&v| !chosen[v]) {
            let gv = state.gain(v);
            if best.is_none_or(|(_, b)| gv > b) {
                best = Some((v, gv));
            }
        }
        let (v, _) = best.expect("candidates remain");
        chosen[v] = true;
        state.commit(v);
        seeds.push(v);
    }
    finish(g, samples, seeds, k_a, AttackMethod::NaiveGreedy)
}

/// Influence-maximization attack on `g` with `x` removed: CELF on fresh
/// samples of the remaining graph. Seeds are reported in `g`'s indices and
/// the value is the estimate on those same samples.
pub fn im_attack(g: &Graph, x: &BlockSet, k_a: usize, spec: &DiffusionSpec) -> Result<AttackOutcome> {
    let sub = block(g, x)?;
    let samples = sample_live_edges(&sub.graph, spec)?;
    let mut out = celf_im(&sub.graph, &samples, k_a)?;
    out.seeds = SeedSet::new(sub.map_to_original(out.seeds.nodes()), k_a)?;
    Ok(out)
}
