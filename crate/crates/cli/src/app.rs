//! Command-line parsing and dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use infblock_core::blockade::{MasterSolver, PruneOrder};
use infblock_core::diffusion::{DiffusionModel, DiffusionSpec, DEFAULT_EVAL_REPLICAS, DEFAULT_GREEDY_REPLICAS};
use infblock_core::netgraph::{forest_fire_sample, DEFAULT_FORWARD_BURN};
use infblock_core::optikit::SOLVER_ENV;
use infblock_core::{BlockSet, Graph};

use crate::experiment::{self, ExperimentConfig};
use crate::graphs::{self, apply_weights, read_graph, write_graph, GeneratorSpec, WeightMode};
use crate::protocol::{evaluate, run_attack, run_defense, AttackSpec, DefenseSpec, Replicas, DEFAULT_IC_PROBABILITY};
use crate::tables::{self, CompareSetup, TradeoffSetup};

#[derive(Debug, Parser)]
#[command(name = "infblock", version, about = "Node-blocking defenses against influence-maximizing attackers")]
#[command(after_help = "The MILP backend is chosen with the INFBLOCK_SOLVER environment variable (default: reference).")]
pub struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a random graph and write it as JSON and as an edge list.
    Gen(GenArgs),
    /// Forest Fire sample of a graph.
    Sample(SampleArgs),
    /// Compute one defense.
    Defend(DefendArgs),
    /// Run one attack against given blocked nodes.
    Attack(AttackArgs),
    /// Estimate the spread of given seeds by simulation.
    Eval(EvalArgs),
    /// Relaxed against exact best-response values on the unblocked graph.
    Gap(GapArgs),
    /// DEF-MILP against constraint generation on ER graphs.
    CgCompare(CompareArgs),
    /// Full sweep described by a JSON configuration.
    Experiment(ExperimentArgs),
    /// Pruned-MILP candidate-set size against run time and quality.
    Tradeoff(TradeoffArgs),
    /// List the known real-world datasets.
    Datasets,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Er,
    Ws,
    Ba,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub n: usize,
    /// ER edge probability.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    /// WS ring successors per node.
    #[arg(long, default_value_t = 5)]
    pub k: usize,
    /// WS rewiring probability.
    #[arg(long, default_value_t = 0.15)]
    pub beta: f64,
    /// BA edges per new node.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WeightArg::Unit)]
    pub weights: WeightArg,
    /// Output prefix; `.json` and `.edges` are appended. Without it the
    /// JSON document goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum WeightArg {
    Unit,
    Uniform,
}

/// Where to read the input graph from.
#[derive(Debug, Args)]
pub struct GraphArgs {
    /// Graph file: `.json` interchange document or whitespace edge list.
    #[arg(long, conflicts_with = "dataset")]
    pub graph: Option<PathBuf>,
    /// Treat an edge-list file as directed.
    #[arg(long)]
    pub directed: bool,
    /// A known dataset by name (see `datasets`).
    #[arg(long, requires = "data_dir")]
    pub dataset: Option<String>,
    #[arg(long)]
    pub data_dir: Option<PathBuf>,
    /// Replace node values with U[0, 1) draws from this seed.
    #[arg(long)]
    pub uniform_weights: Option<u64>,
}

impl GraphArgs {
    pub fn load(&self) -> Result<Graph> {
        let g = match (&self.graph, &self.dataset) {
            (Some(path), _) => read_graph(path, self.directed)?,
            (None, Some(name)) => {
                let dir = self.data_dir.as_deref().expect("clap enforces --data-dir");
                graphs::load_dataset(graphs::dataset(name)?, dir)?
            }
            (None, None) => bail!("give an input graph with --graph or --dataset"),
        };
        match self.uniform_weights {
            Some(seed) => apply_weights(g, WeightMode::Uniform, seed),
            None => Ok(g),
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long)]
    pub target_n: usize,
    /// Forward burning probability.
    #[arg(long, default_value_t = DEFAULT_FORWARD_BURN)]
    pub p_f: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiffusionArg {
    Uic,
    Wic,
    Lt,
}

/// A cascade model from the command line.
#[derive(Debug, Args)]
pub struct DiffusionArgs {
    #[arg(long = "diffusion", value_enum, default_value_t = DiffusionArg::Uic)]
    pub diffusion: DiffusionArg,
    /// Edge probability for the uniform cascade.
    #[arg(long, default_value_t = DEFAULT_IC_PROBABILITY)]
    pub p: f64,
}

impl DiffusionArgs {
    pub fn model(&self) -> DiffusionModel {
        match self.diffusion {
            DiffusionArg::Uic => DiffusionModel::Uic { p: self.p },
            DiffusionArg::Wic => DiffusionModel::Wic,
            DiffusionArg::Lt => DiffusionModel::Lt,
        }
    }
}

#[derive(Debug, Args)]
pub struct DefendArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// def-milp, cg, pruned-milp, brute-force, or a baseline name.
    #[arg(long)]
    pub method: String,
    #[arg(long)]
    pub k_d: usize,
    #[arg(long)]
    pub k_a: usize,
    /// CG termination slack.
    #[arg(long, default_value_t = 0.0)]
    pub gap: f64,
    /// How CG solves its master problem.
    #[arg(long, value_enum, default_value_t = MasterArg::Milp)]
    pub master: MasterArg,
    /// Pruned-MILP candidate-set size.
    #[arg(long)]
    pub l_d: Option<usize>,
    #[arg(long, value_enum, default_value_t = OrderArg::Degree)]
    pub order: OrderArg,
    /// Branch-and-bound node cap for def-milp.
    #[arg(long)]
    pub node_limit: Option<usize>,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    #[arg(long, default_value_t = DEFAULT_GREEDY_REPLICAS)]
    pub replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Degree,
    Wdom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MasterArg {
    /// Solve the master MILP.
    Milp,
    /// Search block sets directly.
    Search,
}

impl From<MasterArg> for MasterSolver {
    fn from(m: MasterArg) -> MasterSolver {
        match m {
            MasterArg::Milp => MasterSolver::Milp,
            MasterArg::Search => MasterSolver::Search,
        }
    }
}

impl From<OrderArg> for PruneOrder {
    fn from(o: OrderArg) -> PruneOrder {
        match o {
            OrderArg::Degree => PruneOrder::Degree,
            OrderArg::Wdom => PruneOrder::Wdom,
        }
    }
}

impl DefendArgs {
    pub fn spec(&self) -> Result<DefenseSpec> {
        Ok(match self.method.as_str() {
            "def-milp" => DefenseSpec::DefMilp { node_limit: self.node_limit },
            "cg" => DefenseSpec::Cg { gap: self.gap, max_iterations: None, master: self.master.into() },
            "pruned-milp" => match self.l_d {
                Some(l_d) => DefenseSpec::PrunedMilp { l_d, order: self.order.into() },
                None => bail!("pruned-milp needs --l-d"),
            },
            "brute-force" => DefenseSpec::BruteForce,
            other => DefenseSpec::from_baseline(infblock_core::baselines::Baseline::parse(other)?),
        })
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<T>().map_err(|e| anyhow::anyhow!("bad list entry {t:?}: {e}")))
        .collect()
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// kmaxvd, im-ic, im-lt or wim.
    #[arg(long)]
    pub attack: String,
    #[arg(long)]
    pub k_a: usize,
    /// Comma-separated blocked nodes.
    #[arg(long, default_value = "")]
    pub blocked: String,
    /// Edge probability for im-ic and for wim under the uniform cascade.
    #[arg(long, default_value_t = DEFAULT_IC_PROBABILITY)]
    pub p: f64,
    /// Cascade for wim.
    #[arg(long, value_enum, default_value_t = DiffusionArg::Uic)]
    pub wim_diffusion: DiffusionArg,
    #[arg(long, default_value_t = DEFAULT_GREEDY_REPLICAS)]
    pub replicas: usize,
    #[arg(long, default_value_t = DEFAULT_EVAL_REPLICAS)]
    pub eval_replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Comma-separated seed nodes.
    #[arg(long)]
    pub seeds: String,
    #[arg(long, default_value = "")]
    pub blocked: String,
    #[command(flatten)]
    pub diffusion: DiffusionArgs,
    #[arg(long, default_value_t = DEFAULT_EVAL_REPLICAS)]
    pub replicas: usize,
    /// Count node values instead of nodes.
    #[arg(long)]
    pub weighted: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    /// Comma-separated attack budgets.
    #[arg(long)]
    pub k_a: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, default_value = "15,25,35")]
    pub sizes: String,
    #[arg(long, default_value_t = 25)]
    pub instances: usize,
    /// Comma-separated CG gaps.
    #[arg(long, default_value = "0")]
    pub gaps: String,
    #[arg(long, default_value_t = 5)]
    pub k_d: usize,
    #[arg(long, default_value_t = 5)]
    pub k_a: usize,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub node_limit: Option<usize>,
    #[arg(long, value_enum, default_value_t = MasterArg::Milp)]
    pub master: MasterArg,
    /// Per-instance rows; the per-size summary goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// JSON configuration file.
    pub config: PathBuf,
    /// Override the configured CSV path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the configured summary path.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    #[command(flatten)]
    pub input: GraphArgs,
    #[arg(long)]
    pub k_d: usize,
    #[arg(long)]
    pub k_a: usize,
    /// Comma-separated candidate-set sizes.
    #[arg(long)]
    pub l_d: String,
    #[arg(long, value_enum, default_value_t = OrderArg::Degree)]
    pub order: OrderArg,
    /// IM attack edge probability.
    #[arg(long, default_value_t = 0.4)]
    pub p: f64,
    #[arg(long, default_value_t = DEFAULT_GREEDY_REPLICAS)]
    pub replicas: usize,
    #[arg(long, default_value_t = DEFAULT_EVAL_REPLICAS)]
    pub eval_replicas: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_nodes(s: &str) -> Result<Vec<usize>> {
    parse_list(s)
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn csv_to_string(write: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<String> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Run a parsed command, writing results to `out`. Returns whether every
/// unit of work succeeded; hard errors come back as `Err`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool> {
    match cli.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build()?;
            let mut buf = Vec::new();
            let ok = pool.install(|| dispatch(&cli.command, &mut buf));
            out.write_all(&buf)?;
            ok
        }
        None => dispatch(&cli.command, out),
    }
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<bool> {
    match cmd {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Defend(a) => cmd_defend(a, out),
        Command::Attack(a) => cmd_attack(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Gap(a) => cmd_gap(a, out),
        Command::CgCompare(a) => cmd_cg_compare(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
        Command::Tradeoff(a) => cmd_tradeoff(a, out),
        Command::Datasets => {
            for d in graphs::DATASETS {
                writeln!(out, "{}\t{}\tnodes={}\tedges={}\t{}", d.name, d.file, d.nodes, d.edges, d.url)?;
            }
            writeln!(out, "solver backend: {}", std::env::var(SOLVER_ENV).unwrap_or_else(|_| "reference".into()))?;
            Ok(true)
        }
    }
}

fn report_graph(g: &Graph, out: &mut dyn Write, prefix: Option<&Path>) -> Result<()> {
    match prefix {
        Some(p) => {
            let (json, edges) = write_graph(g, p)?;
            writeln!(out, "n={} m={} json={} edges={}", g.n(), g.m(), json.display(), edges.display())?;
        }
        None => writeln!(out, "{}", g.to_json()?)?,
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<bool> {
    let spec = match a.model {
        ModelArg::Er => GeneratorSpec::Er { n: a.n, p: a.p },
        ModelArg::Ws => GeneratorSpec::Ws { n: a.n, k: a.k, beta: a.beta },
        ModelArg::Ba => GeneratorSpec::Ba { n: a.n, m: a.m },
    };
    let g = spec.generate(a.seed)?;
    let mode = match a.weights {
        WeightArg::Unit => WeightMode::Keep,
        WeightArg::Uniform => WeightMode::Uniform,
    };
    let g = apply_weights(g, mode, a.seed)?;
    report_graph(&g, out, a.out.as_deref())?;
    Ok(true)
}

fn cmd_sample(a: &SampleArgs, out: &mut dyn Write) -> Result<bool> {
    let g = a.input.load()?;
    let s = forest_fire_sample(&g, a.target_n, a.p_f, a.seed)?;
    report_graph(&s, out, a.out.as_deref())?;
    Ok(true)
}

fn cmd_defend(a: &DefendArgs, out: &mut dyn Write) -> Result<bool> {
    let g = a.input.load()?;
    let spec = DiffusionSpec::new(a.diffusion.model(), a.replicas, a.seed)?;
    let result = run_defense(a.spec()?, &g, a.k_d, a.k_a, &spec)?;
    log::info!("{} finished in {:.3}s", result.method, result.seconds);
    emit(out, a.out.as_deref(), &serde_json::to_string_pretty(&result)?)?;
    Ok(true)
}

fn cmd_attack(a: &AttackArgs, out: &mut dyn Write) -> Result<bool> {
    let g = a.input.load()?;
    let blocked = BlockSet::exact(parse_nodes(&a.blocked)?);
    blocked.mask(g.n())?;
    let wim_model = DiffusionArgs { diffusion: a.wim_diffusion, p: a.p }.model();
    let spec = AttackSpec::parse(&a.attack, Some(a.p), Some(wim_model))?;
    let replicas = Replicas { attack: a.replicas, eval: a.eval_replicas, defense: a.replicas };
    let rec = run_attack(&g, &blocked, spec, a.k_a, a.seed, &replicas)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&rec)?)?;
    Ok(true)
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> Result<bool> {
    let g = a.input.load()?;
    let blocked = BlockSet::exact(parse_nodes(&a.blocked)?);
    blocked.mask(g.n())?;
    let seeds = parse_nodes(&a.seeds)?;
    let spec = DiffusionSpec::new(a.diffusion.model(), a.replicas, a.seed)?;
    let est = evaluate(&g, &blocked, &seeds, &spec, a.weighted)?;
    let doc = json!({
        "seeds": seeds,
        "blocked": blocked.nodes(),
        "model": spec.model,
        "replicas": spec.replicas,
        "seed": spec.seed,
        "mean": est.mean,
        "stderr": est.stderr,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    writeln!(out, "{:?} ± {:?}", est.mean, est.stderr)?;
    Ok(true)
}

fn cmd_gap(a: &GapArgs, out: &mut dyn Write) -> Result<bool> {
    let g = a.input.load()?;
    let k_as: Vec<usize> = parse_list(&a.k_a)?;
    let rows = tables::gap_table(&g, &k_as)?;
    let text = csv_to_string(|buf| tables::write_gap_csv(&rows, buf))?;
    emit(out, a.out.as_deref(), text.trim_end())?;
    Ok(rows.iter().all(|r| r.status == "ok"))
}

fn cmd_cg_compare(a: &CompareArgs, out: &mut dyn Write) -> Result<bool> {
    let setup = CompareSetup {
        sizes: parse_list(&a.sizes)?,
        instances: a.instances,
        gaps: parse_list(&a.gaps)?,
        k_d: a.k_d,
        k_a: a.k_a,
        p: a.p,
        seed: a.seed,
        node_limit: a.node_limit,
        master: a.master.into(),
    };
    let rows = tables::cg_compare(&setup)?;
    if let Some(path) = &a.out {
        let text = csv_to_string(|buf| tables::write_compare_csv(&rows, buf))?;
        emit(out, Some(path), &text)?;
    }
    let summary = tables::summarize_compare(&rows);
    let text = csv_to_string(|buf| tables::write_compare_summary(&summary, buf))?;
    emit(out, None, text.trim_end())?;
    Ok(rows.iter().all(|r| r.status == "ok"))
}

fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<bool> {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if a.out.is_some() {
        cfg.output = a.out.clone();
    }
    if a.summary.is_some() {
        cfg.summary = a.summary.clone();
    }
    experiment::execute(&cfg, out)
}

fn cmd_tradeoff(a: &TradeoffArgs, out: &mut dyn Write) -> Result<bool> {
    let g = a.input.load()?;
    let setup = TradeoffSetup {
        k_d: a.k_d,
        k_a: a.k_a,
        l_ds: parse_list(&a.l_d)?,
        order: a.order.into(),
        p: a.p,
        replicas: Replicas { attack: a.replicas, eval: a.eval_replicas, defense: a.replicas },
        seed: a.seed,
    };
    let rows = tables::tradeoff(&g, &setup)?;
    let text = csv_to_string(|buf| tables::write_tradeoff_csv(&rows, buf))?;
    emit(out, a.out.as_deref(), text.trim_end())?;
    Ok(rows.iter().all(|r| r.status == "ok"))
}
