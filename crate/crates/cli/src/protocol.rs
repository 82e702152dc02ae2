//! Defenses and attacks as configured in experiments, and the functions
//! that run one of each on a graph.

use std::time::Instant;

use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

use infblock_core::adversary::{best_response_milp, celf_im};
use infblock_core::baselines::{run_baseline, Baseline, BaselineContext};
use infblock_core::blockade::{
    brute_force_defense, constraint_generation, def_milp, def_milp_with, pruned_milp, CgIteration, CgLimits, MasterSolver,
    DefenseResult, PruneOrder,
};
use infblock_core::diffusion::{
    estimate_influence, sample_live_edges, DiffusionModel, DiffusionSpec, Estimate, DEFAULT_EVAL_REPLICAS,
    DEFAULT_GREEDY_REPLICAS,
};
use infblock_core::netgraph::block;
use infblock_core::optikit::{MilpParams, Status};
use infblock_core::rng::{self, Fnv64};
use infblock_core::{BlockSet, Graph};

/// Stream ids below the per-cell seed.
const ATTACK_SAMPLES: u64 = 1;
const EVAL_SAMPLES: u64 = 2;

/// Seed for a named sub-task: a stable hash of `parts` mixed into `base`.
pub fn sub_seed(base: u64, parts: &[&str]) -> u64 {
    let mut h = Fnv64::default();
    for part in parts {
        h.write_u64(part.len() as u64);
        for b in part.bytes() {
            h.write_u64(b as u64);
        }
    }
    rng::derive(base, h.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DefenseSpec {
    DefMilp {
        /// Branch-and-bound node cap; the best blocks found so far are
        /// returned when it is hit.
        #[serde(default)]
        node_limit: Option<usize>,
    },
    Cg {
        #[serde(default)]
        gap: f64,
        #[serde(default)]
        max_iterations: Option<usize>,
        #[serde(default)]
        master: MasterSolver,
    },
    PrunedMilp {
        l_d: usize,
        #[serde(default = "degree_order")]
        order: PruneOrder,
    },
    /// Exhaustive search, only for tiny graphs.
    BruteForce,
    Degree,
    Betweenness,
    Pagerank,
    Influence,
    Im,
    GreedyBlocking,
    Wdom,
    Random,
}

fn degree_order() -> PruneOrder {
    PruneOrder::Degree
}

impl DefenseSpec {
    pub fn baseline(self) -> Option<Baseline> {
        Some(match self {
            DefenseSpec::Degree => Baseline::Degree,
            DefenseSpec::Betweenness => Baseline::Betweenness,
            DefenseSpec::Pagerank => Baseline::PageRank,
            DefenseSpec::Influence => Baseline::Influence,
            DefenseSpec::Im => Baseline::Im,
            DefenseSpec::GreedyBlocking => Baseline::GreedyBlocking,
            DefenseSpec::Wdom => Baseline::WDom,
            DefenseSpec::Random => Baseline::Random,
            _ => return None,
        })
    }

    pub fn from_baseline(b: Baseline) -> DefenseSpec {
        match b {
            Baseline::Degree => DefenseSpec::Degree,
            Baseline::Betweenness => DefenseSpec::Betweenness,
            Baseline::PageRank => DefenseSpec::Pagerank,
            Baseline::Influence => DefenseSpec::Influence,
            Baseline::Im => DefenseSpec::Im,
            Baseline::GreedyBlocking => DefenseSpec::GreedyBlocking,
            Baseline::WDom => DefenseSpec::Wdom,
            Baseline::Random => DefenseSpec::Random,
        }
    }

    /// Whether the defense simulates a cascade, and so depends on which
    /// diffusion model it assumes.
    pub fn uses_diffusion(self) -> bool {
        matches!(self, DefenseSpec::Influence | DefenseSpec::Im | DefenseSpec::GreedyBlocking)
    }

    /// Whether the defense plans against a specific attack budget.
    pub fn uses_attack_budget(self) -> bool {
        matches!(
            self,
            DefenseSpec::DefMilp { .. }
                | DefenseSpec::Cg { .. }
                | DefenseSpec::PrunedMilp { .. }
                | DefenseSpec::BruteForce
                | DefenseSpec::GreedyBlocking
        )
    }

    /// Short name used in result tables.
    pub fn label(self) -> String {
        match self {
            DefenseSpec::DefMilp { node_limit: None } => "def-milp".into(),
            DefenseSpec::DefMilp { node_limit: Some(l) } => format!("def-milp/{l}"),
            DefenseSpec::Cg { gap, master: MasterSolver::Milp, .. } => format!("cg/{gap}"),
            DefenseSpec::Cg { gap, master: MasterSolver::Search, .. } => format!("cg-search/{gap}"),
            DefenseSpec::PrunedMilp { l_d, order } => {
                let order = match order {
                    PruneOrder::Degree => "degree",
                    PruneOrder::Wdom => "wdom",
                };
                format!("pruned-milp/{order}/{l_d}")
            }
            DefenseSpec::BruteForce => "brute-force".into(),
            other => other.baseline().expect("remaining variants are baselines").name().into(),
        }
    }
}

/// What a defense run produced, in a form shared by every method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseOutcome {
    pub method: String,
    pub k_d: usize,
    pub k_a: usize,
    pub blocked_nodes: Vec<usize>,
    /// The method's own estimate of the attacker utility, when it has one.
    pub bound: Option<f64>,
    pub status: Option<Status>,
    pub diagnostics: Option<String>,
    pub iterations: Vec<CgIteration>,
    #[serde(skip)]
    pub seconds: f64,
}

impl DefenseOutcome {
    fn from_result(method: String, k_d: usize, k_a: usize, r: DefenseResult, seconds: f64) -> DefenseOutcome {
        DefenseOutcome {
            method,
            k_d,
            k_a,
            blocked_nodes: r.blocked.nodes().to_vec(),
            bound: Some(r.bound),
            status: r.status,
            diagnostics: r.diagnostics,
            iterations: r.iterations,
            seconds,
        }
    }

    pub fn blocked(&self) -> BlockSet {
        BlockSet::exact(self.blocked_nodes.iter().copied())
    }
}

/// Run one defense. `spec` is the cascade assumed by the diffusion-based
/// baselines; its seed also drives the random baseline.
pub fn run_defense(d: DefenseSpec, g: &Graph, k_d: usize, k_a: usize, spec: &DiffusionSpec) -> Result<DefenseOutcome> {
    if k_d > g.n() {
        bail!("defense budget {k_d} exceeds the graph's {} nodes", g.n());
    }
    let started = Instant::now();
    let label = d.label();
    let result = match d {
        DefenseSpec::DefMilp { node_limit: None } => def_milp(g, k_d, k_a)?,
        DefenseSpec::DefMilp { node_limit: Some(limit) } => {
            def_milp_with(g, k_d, k_a, &MilpParams { node_limit: limit, ..MilpParams::default() })?
        }
        DefenseSpec::Cg { gap, max_iterations, master } => {
            let mut limits = CgLimits { master, ..CgLimits::default() };
            if let Some(m) = max_iterations {
                limits.max_iterations = m;
            }
            constraint_generation(g, k_d, k_a, gap, &limits)?
        }
        DefenseSpec::PrunedMilp { l_d, order } => pruned_milp(g, k_d, k_a, l_d, order)?,
        DefenseSpec::BruteForce => brute_force_defense(g, k_d, k_a)?,
        other => {
            let b = other.baseline().expect("remaining variants are baselines");
            let ctx = BaselineContext { spec: *spec, k_a, seed: spec.seed };
            let blocked = run_baseline(g, k_d, b, &ctx)?;
            return Ok(DefenseOutcome {
                method: label,
                k_d,
                k_a,
                blocked_nodes: blocked.nodes().to_vec(),
                bound: None,
                status: None,
                diagnostics: None,
                iterations: Vec::new(),
                seconds: started.elapsed().as_secs_f64(),
            });
        }
    };
    Ok(DefenseOutcome::from_result(label, k_d, k_a, result, started.elapsed().as_secs_f64()))
}

pub const DEFAULT_IC_PROBABILITY: f64 = 0.1;

fn default_p() -> f64 {
    DEFAULT_IC_PROBABILITY
}

fn default_wim_model() -> DiffusionModel {
    DiffusionModel::Uic { p: DEFAULT_IC_PROBABILITY }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AttackSpec {
    /// Exact domination best response.
    Kmaxvd,
    /// CELF under the uniform independent cascade, node values ignored.
    ImIc {
        #[serde(default = "default_p")]
        p: f64,
    },
    /// CELF under linear threshold, node values ignored.
    ImLt,
    /// CELF maximizing the weighted spread.
    Wim {
        #[serde(default = "default_wim_model")]
        model: DiffusionModel,
    },
}

impl AttackSpec {
    pub fn parse(kind: &str, p: Option<f64>, wim_model: Option<DiffusionModel>) -> Result<AttackSpec> {
        Ok(match kind {
            "kmaxvd" => AttackSpec::Kmaxvd,
            "im-ic" => AttackSpec::ImIc { p: p.unwrap_or(DEFAULT_IC_PROBABILITY) },
            "im-lt" => AttackSpec::ImLt,
            "wim" => AttackSpec::Wim { model: wim_model.unwrap_or_else(default_wim_model) },
            other => bail!("unknown attack {other:?} (expected kmaxvd, im-ic, im-lt or wim)"),
        })
    }

    /// The cascade the attack simulates, if any.
    pub fn model(self) -> Option<DiffusionModel> {
        match self {
            AttackSpec::Kmaxvd => None,
            AttackSpec::ImIc { p } => Some(DiffusionModel::Uic { p }),
            AttackSpec::ImLt => Some(DiffusionModel::Lt),
            AttackSpec::Wim { model } => Some(model),
        }
    }

    pub fn label(self) -> String {
        match self {
            AttackSpec::Kmaxvd => "kmaxvd".into(),
            AttackSpec::ImIc { p } => format!("im-ic/{p}"),
            AttackSpec::ImLt => "im-lt".into(),
            AttackSpec::Wim { model } => format!("wim/{}", model_label(model)),
        }
    }
}

pub fn model_label(m: DiffusionModel) -> String {
    match m {
        DiffusionModel::Uic { p } => format!("uic/{p}"),
        DiffusionModel::Wic => "wic".into(),
        DiffusionModel::Lt => "lt".into(),
    }
}

/// Sample counts for the cascade-based steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Replicas {
    /// Live-edge samples the attacker optimizes over.
    pub attack: usize,
    /// Independent samples used to score the attacker's seeds.
    pub eval: usize,
    /// Samples for the diffusion-based defenses.
    pub defense: usize,
}

impl Default for Replicas {
    fn default() -> Self {
        Replicas { attack: DEFAULT_GREEDY_REPLICAS, eval: DEFAULT_EVAL_REPLICAS, defense: DEFAULT_GREEDY_REPLICAS }
    }
}

/// Result of one attack against a fixed defense.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackRecord {
    pub attack: String,
    pub k_a: usize,
    pub blocked: Vec<usize>,
    pub seeds: Vec<usize>,
    pub utility: f64,
    pub stderr: f64,
    /// Solver bound for the exact attack.
    pub bound: Option<f64>,
    pub status: Option<Status>,
    pub seed: u64,
}

/// Attack `g` with `x` removed. Cascade attacks run CELF on
/// `replicas.attack` samples and are scored on a separate set of
/// `replicas.eval` samples, so the reported utility carries no selection
/// bias from the optimization.
pub fn run_attack(
    g: &Graph,
    x: &BlockSet,
    a: AttackSpec,
    k_a: usize,
    seed: u64,
    replicas: &Replicas,
) -> Result<AttackRecord> {
    let free = g.n() - x.len();
    let k = k_a.min(free);
    let mut rec = AttackRecord {
        attack: a.label(),
        k_a,
        blocked: x.nodes().to_vec(),
        seeds: Vec::new(),
        utility: 0.0,
        stderr: 0.0,
        bound: None,
        status: None,
        seed,
    };
    let Some(model) = a.model() else {
        let out = best_response_milp(g, x, k)?;
        rec.seeds = out.seeds.nodes().to_vec();
        rec.utility = out.value;
        rec.bound = out.bound;
        rec.status = out.status;
        return Ok(rec);
    };
    let weighted = matches!(a, AttackSpec::Wim { .. });
    let sub = block(g, x)?;
    let h = if weighted { sub.graph.clone() } else { sub.graph.clone().with_weights(vec![1.0; sub.graph.n()])? };
    if h.n() == 0 {
        return Ok(rec);
    }
    let train = DiffusionSpec::new(model, replicas.attack, rng::derive(seed, ATTACK_SAMPLES))?;
    let chosen = celf_im(&h, &sample_live_edges(&h, &train)?, k)?;
    let test = DiffusionSpec::new(model, replicas.eval, rng::derive(seed, EVAL_SAMPLES))?;
    let samples = sample_live_edges(&h, &test)?;
    let est = estimate_influence(&h, &samples, chosen.seeds.nodes(), weighted.then(|| h.weights()))?;
    rec.seeds = sub.map_to_original(chosen.seeds.nodes());
    rec.utility = est.mean;
    rec.stderr = est.stderr;
    Ok(rec)
}

/// Estimated spread of `seeds` on `g` with `x` removed.
pub fn evaluate(
    g: &Graph,
    x: &BlockSet,
    seeds: &[usize],
    spec: &DiffusionSpec,
    weighted: bool,
) -> Result<Estimate> {
    if let Some(s) = seeds.iter().find(|&&s| s >= g.n() || x.contains(s)) {
        bail!("seed {s} is out of range or blocked");
    }
    let sub = block(g, x)?;
    let h = if weighted { sub.graph.clone() } else { sub.graph.clone().with_weights(vec![1.0; sub.graph.n()])? };
    let local: Vec<usize> = seeds.iter().map(|&s| sub.from_original(s).expect("seed survives")).collect();
    let samples = sample_live_edges(&h, spec)?;
    Ok(estimate_influence(&h, &samples, &local, weighted.then(|| h.weights()))?)
}
