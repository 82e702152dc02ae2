//! Full sweeps: graphs × defenses × defense budgets × attacks × attack
//! budgets, written as one long-format CSV row per cell.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use infblock_core::diffusion::{DiffusionModel, DiffusionSpec};
use infblock_core::{BlockSet, Graph};

use crate::graphs::{apply_weights, GraphSource, WeightMode};
use crate::protocol::{
    model_label, run_attack, run_defense, sub_seed, AttackSpec, DefenseOutcome, DefenseSpec, Replicas,
    DEFAULT_IC_PROBABILITY,
};

pub const CSV_HEADER: [&str; 10] = ["graph", "defense", "attack", "k_D", "k_A", "utility", "stderr", "bound", "seconds", "seed"];

/// Label of the defense column for attack-only rows.
pub const NO_DEFENSE: &str = "none";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphEntry {
    pub id: String,
    pub source: GraphSource,
    #[serde(default = "one")]
    pub instances: usize,
    #[serde(default)]
    pub weights: WeightMode,
}

fn one() -> usize {
    1
}

fn default_defense_model() -> DiffusionModel {
    DiffusionModel::Uic { p: DEFAULT_IC_PROBABILITY }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    /// Master seed; every random choice in the sweep derives from it.
    pub seed: u64,
    pub graphs: Vec<GraphEntry>,
    /// An empty list gives one attack-only row per attack cell.
    #[serde(default)]
    pub defenses: Vec<DefenseSpec>,
    #[serde(default)]
    pub k_d: Vec<usize>,
    pub attacks: Vec<AttackSpec>,
    pub k_a: Vec<usize>,
    #[serde(default)]
    pub replicas: Replicas,
    /// Cascade assumed by the diffusion-based defenses when the attack
    /// itself is not a cascade. Against cascade attacks they assume the
    /// attack's own model.
    #[serde(default = "default_defense_model")]
    pub defense_model: DiffusionModel,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// JSON file with per-cell details and per-suite means.
    #[serde(default)]
    pub summary: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parse and validate a configuration, resolving relative paths
    /// against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<ExperimentConfig> {
        let mut cfg: ExperimentConfig = serde_json::from_str(text).context("parsing experiment configuration")?;
        if let Some(base) = base {
            cfg.resolve_paths(base);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        ExperimentConfig::from_json(&text, path.parent())
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for g in &mut self.graphs {
            match &mut g.source {
                GraphSource::File { path, .. } => fix(path),
                GraphSource::Dataset { dir, .. } => fix(dir),
                GraphSource::Generator(_) => {}
            }
        }
        if let Some(p) = &mut self.output {
            fix(p);
        }
        if let Some(p) = &mut self.summary {
            fix(p);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.graphs.is_empty() {
            bail!("configuration lists no graphs");
        }
        if self.attacks.is_empty() || self.k_a.is_empty() {
            bail!("configuration needs at least one attack and one attack budget");
        }
        if !self.defenses.is_empty() && self.k_d.is_empty() {
            bail!("defenses are listed but no defense budgets k_d");
        }
        let mut ids = BTreeSet::new();
        for g in &self.graphs {
            if !ids.insert(g.id.as_str()) {
                bail!("graph id {:?} appears twice", g.id);
            }
            if g.instances == 0 {
                bail!("graph {:?} has zero instances", g.id);
            }
            g.source.check_exists()?;
            if let GraphSource::Generator(spec) = &g.source {
                check_budgets(&g.id, spec.n(), self)?;
            }
        }
        if self.replicas.attack == 0 || self.replicas.eval == 0 || self.replicas.defense == 0 {
            bail!("replica counts must be positive");
        }
        for a in &self.attacks {
            if let Some(m) = a.model() {
                DiffusionSpec::new(m, 1, 0)?;
            }
        }
        DiffusionSpec::new(self.defense_model, 1, 0)?;
        Ok(())
    }
}

fn check_budgets(id: &str, n: usize, cfg: &ExperimentConfig) -> Result<()> {
    if let Some(k) = cfg.k_d.iter().chain(&cfg.k_a).find(|&&k| k > n) {
        bail!("budget {k} exceeds the {n} nodes of graph {id:?}");
    }
    Ok(())
}

/// One row of the results table, plus the details needed to replay it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub graph: String,
    pub defense: String,
    pub attack: String,
    pub k_d: usize,
    pub k_a: usize,
    pub utility: Option<f64>,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
    #[serde(skip)]
    pub seconds: f64,
    /// Seed that reproduces the attack step.
    pub seed: u64,
    /// Seed the graph instance was generated from.
    pub graph_seed: u64,
    pub blocked: Vec<usize>,
    pub seeds: Vec<usize>,
    pub defense_bound: Option<f64>,
    pub status: Option<String>,
    pub error: Option<String>,
}

impl RunRecord {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }

    fn csv_fields(&self) -> [String; 10] {
        let num = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.graph.clone(),
            self.defense.clone(),
            self.attack.clone(),
            self.k_d.to_string(),
            self.k_a.to_string(),
            num(self.utility),
            num(self.stderr),
            num(self.bound),
            format!("{:.3}", self.seconds),
            self.seed.to_string(),
        ]
    }
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Mean over instances for one (suite, defense, attack, budgets) group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub suite: String,
    pub defense: String,
    pub attack: String,
    pub k_d: usize,
    pub k_a: usize,
    pub cells: usize,
    pub failures: usize,
    pub mean_utility: f64,
    /// Standard error of the mean from the per-cell standard errors.
    pub pooled_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: Option<String>,
    pub seed: u64,
    pub groups: Vec<GroupSummary>,
    pub records: Vec<RunRecord>,
}

pub fn summarize(cfg: &ExperimentConfig, records: &[RunRecord], suites: &[String]) -> ExperimentSummary {
    let mut groups: BTreeMap<(String, String, String, usize, usize), Vec<&RunRecord>> = BTreeMap::new();
    for (r, suite) in records.iter().zip(suites) {
        groups.entry((suite.clone(), r.defense.clone(), r.attack.clone(), r.k_d, r.k_a)).or_default().push(r);
    }
    let groups = groups
        .into_iter()
        .map(|((suite, defense, attack, k_d, k_a), rows)| {
            let good: Vec<_> = rows.iter().filter(|r| r.ok()).collect();
            let c = good.len() as f64;
            let mean = good.iter().filter_map(|r| r.utility).sum::<f64>() / c;
            let var = good.iter().filter_map(|r| r.stderr).map(|s| s * s).sum::<f64>();
            GroupSummary {
                suite,
                defense,
                attack,
                k_d,
                k_a,
                cells: rows.len(),
                failures: rows.len() - good.len(),
                mean_utility: mean,
                pooled_stderr: var.sqrt() / c,
            }
        })
        .collect();
    ExperimentSummary { name: cfg.name.clone(), seed: cfg.seed, groups, records: records.to_vec() }
}

struct Instance {
    suite: String,
    label: String,
    seed: u64,
    graph: Result<Graph, String>,
}

fn build_instances(cfg: &ExperimentConfig) -> Vec<Instance> {
    let jobs: Vec<(&GraphEntry, usize)> =
        cfg.graphs.iter().flat_map(|e| (0..e.instances).map(move |i| (e, i))).collect();
    jobs.par_iter()
        .map(|&(e, i)| {
            let seed = sub_seed(cfg.seed, &["graph", &e.id, &i.to_string()]);
            let label = if e.instances == 1 { e.id.clone() } else { format!("{}-{i}", e.id) };
            let graph = e
                .source
                .load(seed)
                .and_then(|g| apply_weights(g, e.weights, sub_seed(seed, &["weights"])))
                .and_then(|g| {
                    check_budgets(&label, g.n(), cfg)?;
                    Ok(g)
                })
                .map_err(|err| format!("{err:#}"));
            Instance { suite: e.id.clone(), label, seed, graph }
        })
        .collect()
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct DefenseKey {
    instance: usize,
    defense: usize,
    k_d: usize,
    k_a: Option<usize>,
    model: Option<String>,
}

/// The cascade a diffusion-based defense assumes in a given attack cell.
fn assumed_model(cfg: &ExperimentConfig, attack: AttackSpec) -> DiffusionModel {
    attack.model().unwrap_or(cfg.defense_model)
}

/// Run every cell. Cells are independent and draw their randomness from
/// the master seed and their own coordinates, so the result does not
/// depend on scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<RunRecord>, ExperimentSummary)> {
    let instances = build_instances(cfg);

    let mut keys = BTreeSet::new();
    for (ii, _) in instances.iter().enumerate().filter(|(_, inst)| inst.graph.is_ok()) {
        for (di, d) in cfg.defenses.iter().enumerate() {
            for &k_d in &cfg.k_d {
                for &k_a in &cfg.k_a {
                    for &a in &cfg.attacks {
                        keys.insert(defense_key(cfg, ii, di, *d, k_d, k_a, a));
                    }
                }
            }
        }
    }
    let keys: Vec<DefenseKey> = keys.into_iter().collect();
    let outcomes: Vec<Result<DefenseOutcome, String>> = keys
        .par_iter()
        .map(|key| {
            let inst = &instances[key.instance];
            let g = inst.graph.as_ref().expect("only loaded instances get defenses");
            let d = cfg.defenses[key.defense];
            let k_a = key.k_a.unwrap_or(0);
            let model_name = key.model.clone().unwrap_or_default();
            let seed = sub_seed(inst.seed, &["defense", &d.label(), &key.k_d.to_string(), &k_a.to_string(), &model_name]);
            let model = key.model.as_ref().map(|_| key_model(cfg, key)).unwrap_or(cfg.defense_model);
            let spec = DiffusionSpec { model, replicas: cfg.replicas.defense, seed };
            run_defense(d, g, key.k_d, k_a, &spec).map_err(|e| format!("{e:#}"))
        })
        .collect();
    let by_key: BTreeMap<&DefenseKey, &Result<DefenseOutcome, String>> = keys.iter().zip(&outcomes).collect();

    struct Cell<'a> {
        instance: usize,
        defense: Option<(usize, usize, &'a Result<DefenseOutcome, String>)>,
        attack: AttackSpec,
        k_a: usize,
    }
    let missing: Vec<Result<DefenseOutcome, String>> = instances.iter().map(Instance::graph_error_outcome).collect();
    let mut cells = Vec::new();
    for (ii, _) in instances.iter().enumerate() {
        if cfg.defenses.is_empty() {
            for &a in &cfg.attacks {
                for &k_a in &cfg.k_a {
                    cells.push(Cell { instance: ii, defense: None, attack: a, k_a });
                }
            }
            continue;
        }
        for (di, d) in cfg.defenses.iter().enumerate() {
            for &k_d in &cfg.k_d {
                for &a in &cfg.attacks {
                    for &k_a in &cfg.k_a {
                        let key = defense_key(cfg, ii, di, *d, k_d, k_a, a);
                        let outcome = by_key.get(&key).copied().unwrap_or(&missing[ii]);
                        cells.push(Cell { instance: ii, defense: Some((di, k_d, outcome)), attack: a, k_a });
                    }
                }
            }
        }
    }

    let records: Vec<RunRecord> = cells
        .par_iter()
        .map(|cell| {
            let inst = &instances[cell.instance];
            let (defense, k_d) = match cell.defense {
                Some((di, k_d, _)) => (cfg.defenses[di].label(), k_d),
                None => (NO_DEFENSE.to_string(), 0),
            };
            let seed = sub_seed(inst.seed, &["attack", &cell.attack.label(), &cell.k_a.to_string()]);
            let mut rec = RunRecord {
                graph: inst.label.clone(),
                defense,
                attack: cell.attack.label(),
                k_d,
                k_a: cell.k_a,
                utility: None,
                stderr: None,
                bound: None,
                seconds: 0.0,
                seed,
                graph_seed: inst.seed,
                blocked: Vec::new(),
                seeds: Vec::new(),
                defense_bound: None,
                status: None,
                error: None,
            };
            let g = match &inst.graph {
                Ok(g) => g,
                Err(e) => {
                    rec.error = Some(e.clone());
                    return rec;
                }
            };
            let blocked = match cell.defense {
                None => BlockSet::empty(),
                Some((_, _, Err(e))) => {
                    rec.error = Some(e.clone());
                    return rec;
                }
                Some((_, _, Ok(out))) => {
                    rec.seconds += out.seconds;
                    rec.defense_bound = out.bound;
                    rec.status = out.status.map(|s| format!("{s:?}"));
                    out.blocked()
                }
            };
            rec.blocked = blocked.nodes().to_vec();
            let started = Instant::now();
            match run_attack(g, &blocked, cell.attack, cell.k_a, seed, &cfg.replicas) {
                Ok(att) => {
                    rec.utility = Some(att.utility);
                    rec.stderr = Some(att.stderr);
                    rec.bound = att.bound;
                    rec.seeds = att.seeds;
                }
                Err(e) => rec.error = Some(format!("{e:#}")),
            }
            rec.seconds += started.elapsed().as_secs_f64();
            rec
        })
        .collect();
    let suites: Vec<String> = cells.iter().map(|c| instances[c.instance].suite.clone()).collect();
    let summary = summarize(cfg, &records, &suites);
    Ok((records, summary))
}

impl Instance {
    fn graph_error_outcome(&self) -> Result<DefenseOutcome, String> {
        Err(self.graph.as_ref().err().cloned().unwrap_or_else(|| "defense was not scheduled".into()))
    }
}

fn defense_key(
    cfg: &ExperimentConfig,
    instance: usize,
    defense: usize,
    d: DefenseSpec,
    k_d: usize,
    k_a: usize,
    attack: AttackSpec,
) -> DefenseKey {
    DefenseKey {
        instance,
        defense,
        k_d,
        k_a: d.uses_attack_budget().then_some(k_a),
        model: d.uses_diffusion().then(|| model_label(assumed_model(cfg, attack))),
    }
}

/// Recover the model behind a key's label.
fn key_model(cfg: &ExperimentConfig, key: &DefenseKey) -> DiffusionModel {
    let wanted = key.model.as_deref();
    cfg.attacks
        .iter()
        .map(|&a| assumed_model(cfg, a))
        .find(|&m| Some(model_label(m).as_str()) == wanted)
        .unwrap_or(cfg.defense_model)
}

/// Run a configuration and write its outputs. Returns whether every cell
/// succeeded.
pub fn execute(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<bool> {
    let (records, summary) = run_experiment(cfg)?;
    match &cfg.output {
        Some(path) => {
            let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&records, file)?;
        }
        None => write_csv(&records, &mut *stdout)?,
    }
    if let Some(path) = &cfg.summary {
        std::fs::write(path, serde_json::to_string_pretty(&summary)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let failed: Vec<_> = records.iter().filter(|r| !r.ok()).collect();
    for r in &failed {
        log::error!(
            "cell {} / {} / {} / k_D={} / k_A={} failed: {}",
            r.graph,
            r.defense,
            r.attack,
            r.k_d,
            r.k_a,
            r.error.as_deref().unwrap_or("")
        );
    }
    Ok(failed.is_empty())
}
