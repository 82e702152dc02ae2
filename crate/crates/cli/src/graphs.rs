//! Graph sources: generators, files on disk and the known real-world datasets.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use infblock_core::netgraph::{gen_ba, gen_er, gen_ws, load_edge_list_path, uniform_weights};
use infblock_core::Graph;

/// Random-graph model and its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorSpec {
    Er { n: usize, p: f64 },
    /// `k` ring successors per node, so lattice degree `2k`.
    Ws { n: usize, k: usize, beta: f64 },
    Ba { n: usize, m: usize },
}

impl GeneratorSpec {
    pub fn generate(&self, seed: u64) -> Result<Graph> {
        Ok(match *self {
            GeneratorSpec::Er { n, p } => gen_er(n, p, seed)?,
            GeneratorSpec::Ws { n, k, beta } => gen_ws(n, k, beta, seed)?,
            GeneratorSpec::Ba { n, m } => gen_ba(n, m, seed)?,
        })
    }

    pub fn n(&self) -> usize {
        match *self {
            GeneratorSpec::Er { n, .. } | GeneratorSpec::Ws { n, .. } | GeneratorSpec::Ba { n, .. } => n,
        }
    }
}

/// How node values are assigned after the graph is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// Keep whatever the source provides (unit weights for generators).
    #[default]
    Keep,
    Unit,
    /// Independent U[0, 1) draws.
    Uniform,
}

pub fn apply_weights(g: Graph, mode: WeightMode, seed: u64) -> Result<Graph> {
    let n = g.n();
    Ok(match mode {
        WeightMode::Keep => g,
        WeightMode::Unit => g.with_weights(vec![1.0; n])?,
        WeightMode::Uniform => g.with_weights(uniform_weights(n, seed))?,
    })
}

/// Read a graph: JSON documents by extension, anything else as an edge list.
pub fn read_graph(path: &Path, directed: bool) -> Result<Graph> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return Graph::from_json(&text).with_context(|| format!("parsing {}", path.display()));
    }
    let (g, report) = load_edge_list_path(path, directed, None).with_context(|| format!("reading {}", path.display()))?;
    if report.self_loops + report.duplicates > 0 {
        log::info!(
            "{}: dropped {} self loops and {} duplicate edges",
            path.display(),
            report.self_loops,
            report.duplicates
        );
    }
    Ok(g)
}

/// Write `<prefix>.json` and `<prefix>.edges`, returning both paths.
pub fn write_graph(g: &Graph, prefix: &Path) -> Result<(PathBuf, PathBuf)> {
    let json = prefix.with_extension("json");
    let edges = prefix.with_extension("edges");
    std::fs::write(&json, g.to_json()?).with_context(|| format!("writing {}", json.display()))?;
    std::fs::write(&edges, g.to_edge_list()).with_context(|| format!("writing {}", edges.display()))?;
    Ok((json, edges))
}

/// A public network the harness knows how to load and check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dataset {
    pub name: &'static str,
    /// File expected inside the data directory.
    pub file: &'static str,
    pub directed: bool,
    pub nodes: usize,
    /// Edge count as published, before self loops and duplicates are dropped.
    pub edges: usize,
    pub url: &'static str,
}

pub const DATASETS: [Dataset; 2] = [
    Dataset {
        name: "email-eu-core",
        file: "email-Eu-core.txt",
        directed: true,
        nodes: 1005,
        edges: 25571,
        url: "https://snap.stanford.edu/data/email-Eu-core.html",
    },
    Dataset {
        name: "hamsterster",
        file: "out.petster-friendships-hamster-uniq",
        directed: false,
        nodes: 1858,
        edges: 12534,
        url: "http://konect.cc/networks/petster-friendships-hamster/",
    },
];

pub fn dataset(name: &str) -> Result<&'static Dataset> {
    match DATASETS.iter().find(|d| d.name.eq_ignore_ascii_case(name)) {
        Some(d) => Ok(d),
        None => {
            let known: Vec<_> = DATASETS.iter().map(|d| d.name).collect();
            bail!("unknown dataset {name:?} (known: {})", known.join(", "))
        }
    }
}

/// Load a dataset from `dir` and check its node and edge counts against
/// the manifest.
pub fn load_dataset(d: &Dataset, dir: &Path) -> Result<Graph> {
    let path = dir.join(d.file);
    let (g, report) = load_edge_list_path(&path, d.directed, None)
        .with_context(|| format!("loading {} from {} (see {})", d.name, path.display(), d.url))?;
    let raw_edges = g.m() + report.self_loops + report.duplicates;
    if g.n() != d.nodes || (g.m() != d.edges && raw_edges != d.edges) {
        bail!(
            "{}: expected {} nodes and {} edges, found {} nodes and {} edges ({} raw lines)",
            d.name,
            d.nodes,
            d.edges,
            g.n(),
            g.m(),
            raw_edges
        );
    }
    Ok(g)
}

/// Where a graph comes from in an experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum GraphSource {
    Generator(GeneratorSpec),
    File {
        path: PathBuf,
        #[serde(default)]
        directed: bool,
    },
    Dataset {
        name: String,
        dir: PathBuf,
    },
}

impl GraphSource {
    /// Instance `seed` of the source. Files and datasets ignore the seed.
    pub fn load(&self, seed: u64) -> Result<Graph> {
        match self {
            GraphSource::Generator(spec) => spec.generate(seed),
            GraphSource::File { path, directed } => read_graph(path, *directed),
            GraphSource::Dataset { name, dir } => load_dataset(dataset(name)?, dir),
        }
    }

    /// Fail early when a referenced file is missing.
    pub fn check_exists(&self) -> Result<()> {
        let path = match self {
            GraphSource::Generator(_) => return Ok(()),
            GraphSource::File { path, .. } => path.clone(),
            GraphSource::Dataset { name, dir } => dir.join(dataset(name)?.file),
        };
        if !path.exists() {
            bail!("graph file {} does not exist", path.display());
        }
        Ok(())
    }
}
