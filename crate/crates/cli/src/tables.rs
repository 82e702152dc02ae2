//! The fixed-format tables: integrality gap, CG against DEF-MILP, and the
//! pruning trade-off.

use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use infblock_core::adversary::{best_response_lp, best_response_milp};
use infblock_core::blockade::{MasterSolver, PruneOrder};
use infblock_core::diffusion::DiffusionModel;
use infblock_core::netgraph::gen_er;
use infblock_core::optikit::Status;
use infblock_core::{BlockSet, Graph};

use crate::protocol::{run_attack, run_defense, sub_seed, AttackSpec, DefenseSpec, Replicas};

fn status_name(s: Option<Status>) -> String {
    match s {
        Some(Status::Optimal) | None => "ok".into(),
        Some(other) => format!("{other:?}"),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub k_a: usize,
    pub m_lp: f64,
    pub m_milp: f64,
    /// `(M_LP - M_MILP) / M_MILP` in per-mille.
    pub gap_permille: f64,
    pub status: String,
}

/// Relaxed and exact best-response values on the unblocked graph.
pub fn gap_table(g: &Graph, k_as: &[usize]) -> Result<Vec<GapRow>> {
    k_as.par_iter()
        .map(|&k_a| {
            let x = BlockSet::empty();
            let m_lp = best_response_lp(g, &x, k_a)?;
            let exact = best_response_milp(g, &x, k_a)?;
            let m_milp = exact.value;
            let gap_permille = if m_milp > 0.0 { 1000.0 * (m_lp - m_milp) / m_milp } else { 0.0 };
            Ok(GapRow { k_a, m_lp, m_milp, gap_permille, status: status_name(exact.status) })
        })
        .collect()
}

pub fn write_gap_csv<W: Write>(rows: &[GapRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["k_A", "M_LP", "M_MILP", "gap_permille", "status"])?;
    for r in rows {
        w.write_record([
            r.k_a.to_string(),
            format!("{:.3}", r.m_lp),
            format!("{:.3}", r.m_milp),
            format!("{:.3}", r.gap_permille),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: usize,
    pub instance: usize,
    pub method: String,
    /// Exact best-response value at the returned blocks.
    pub utility: f64,
    pub bound: f64,
    pub seconds: f64,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareSummary {
    pub n: usize,
    pub method: String,
    pub instances: usize,
    pub mean_utility: f64,
    pub mean_seconds: f64,
    pub median_seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareSetup {
    pub sizes: Vec<usize>,
    pub instances: usize,
    pub gaps: Vec<f64>,
    pub k_d: usize,
    pub k_a: usize,
    pub p: f64,
    pub seed: u64,
    pub node_limit: Option<usize>,
    pub master: MasterSolver,
}

impl Default for CompareSetup {
    fn default() -> Self {
        CompareSetup {
            sizes: vec![15, 25, 35],
            instances: 25,
            gaps: vec![0.0],
            k_d: 5,
            k_a: 5,
            p: 0.1,
            seed: 0,
            node_limit: None,
            master: MasterSolver::Milp,
        }
    }
}

/// DEF-MILP and CG at each gap on ER instances of each size. Instances run
/// one after another so that the recorded times are not skewed by sharing
/// cores; the solvers may still parallelize internally.
pub fn cg_compare(setup: &CompareSetup) -> Result<Vec<CompareRow>> {
    let mut methods = vec![DefenseSpec::DefMilp { node_limit: setup.node_limit }];
    methods.extend(setup.gaps.iter().map(|&gap| DefenseSpec::Cg { gap, max_iterations: None, master: setup.master }));
    let mut rows = Vec::new();
    for &n in &setup.sizes {
        for i in 0..setup.instances {
            let seed = sub_seed(setup.seed, &["cg-compare", &n.to_string(), &i.to_string()]);
            let g = gen_er(n, setup.p, seed)?;
            for &m in &methods {
                let started = Instant::now();
                let out = run_defense(m, &g, setup.k_d.min(n), setup.k_a, &unused_spec())?;
                let seconds = started.elapsed().as_secs_f64();
                let utility = best_response_milp(&g, &out.blocked(), setup.k_a)?.value;
                rows.push(CompareRow {
                    n,
                    instance: i,
                    method: m.label(),
                    utility,
                    bound: out.bound.unwrap_or(f64::NAN),
                    seconds,
                    status: status_name(out.status),
                });
            }
        }
    }
    Ok(rows)
}

/// The MILP and CG defenses never simulate a cascade.
fn unused_spec() -> infblock_core::diffusion::DiffusionSpec {
    infblock_core::diffusion::DiffusionSpec { model: DiffusionModel::Lt, replicas: 1, seed: 0 }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k == 0 {
        return f64::NAN;
    }
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

pub fn summarize_compare(rows: &[CompareRow]) -> Vec<CompareSummary> {
    let mut keys: Vec<(usize, String)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(n, m)| *n == r.n && *m == r.method) {
            keys.push((r.n, r.method.clone()));
        }
    }
    keys.into_iter()
        .map(|(n, method)| {
            let sel: Vec<&CompareRow> = rows.iter().filter(|r| r.n == n && r.method == method).collect();
            let c = sel.len() as f64;
            CompareSummary {
                n,
                instances: sel.len(),
                mean_utility: sel.iter().map(|r| r.utility).sum::<f64>() / c,
                mean_seconds: sel.iter().map(|r| r.seconds).sum::<f64>() / c,
                median_seconds: median(sel.iter().map(|r| r.seconds).collect()),
                method,
            }
        })
        .collect()
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "instance", "method", "utility", "bound", "seconds", "status"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.instance.to_string(),
            r.method.clone(),
            r.utility.to_string(),
            r.bound.to_string(),
            format!("{:.3}", r.seconds),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_compare_summary<W: Write>(rows: &[CompareSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "method", "instances", "mean_utility", "mean_seconds", "median_seconds"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.method.clone(),
            r.instances.to_string(),
            format!("{:.4}", r.mean_utility),
            format!("{:.3}", r.mean_seconds),
            format!("{:.3}", r.median_seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TradeoffRow {
    pub l_d: usize,
    pub seconds: f64,
    pub u_im: f64,
    pub u_im_stderr: f64,
    pub u_kmaxvd: f64,
    pub blocked: Vec<usize>,
    pub status: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffSetup {
    pub k_d: usize,
    pub k_a: usize,
    pub l_ds: Vec<usize>,
    pub order: PruneOrder,
    /// Cascade probability of the IM attack.
    pub p: f64,
    pub replicas: Replicas,
    pub seed: u64,
}

/// One pruned-MILP per candidate-set size, each scored by the exact
/// domination attack and an IM attack. The attack seed is shared across
/// rows.
pub fn tradeoff(g: &Graph, setup: &TradeoffSetup) -> Result<Vec<TradeoffRow>> {
    let attack_seed = sub_seed(setup.seed, &["tradeoff-attack"]);
    let im = AttackSpec::ImIc { p: setup.p };
    setup
        .l_ds
        .iter()
        .map(|&l_d| {
            let d = DefenseSpec::PrunedMilp { l_d, order: setup.order };
            let started = Instant::now();
            let out = run_defense(d, g, setup.k_d, setup.k_a, &unused_spec())?;
            let seconds = started.elapsed().as_secs_f64();
            let x = out.blocked();
            let kmax = run_attack(g, &x, AttackSpec::Kmaxvd, setup.k_a, attack_seed, &setup.replicas)?;
            let imr = run_attack(g, &x, im, setup.k_a, attack_seed, &setup.replicas)?;
            let status = match (out.status, kmax.status) {
                (Some(s), _) if s != Status::Optimal => format!("defense {s:?}"),
                (_, Some(s)) if s != Status::Optimal => format!("attack {s:?}"),
                _ => "ok".into(),
            };
            Ok(TradeoffRow {
                l_d,
                seconds,
                u_im: imr.utility,
                u_im_stderr: imr.stderr,
                u_kmaxvd: kmax.utility,
                blocked: out.blocked_nodes,
                status,
            })
        })
        .collect()
}

pub fn write_tradeoff_csv<W: Write>(rows: &[TradeoffRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["l_d", "seconds", "U_IM", "U_IM_stderr", "U_kMaxVD", "status"])?;
    for r in rows {
        w.write_record([
            r.l_d.to_string(),
            format!("{:.3}", r.seconds),
            format!("{:.3}", r.u_im),
            format!("{:.3}", r.u_im_stderr),
            format!("{:.3}", r.u_kmaxvd),
            r.status.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
