use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversary::best_response_lp;
use crate::error::param;
use crate::netgraph::dominated_by;
use crate::optikit::{self, Cmp, MilpParams, Model, Sense, VarId};
use crate::{BlockSet, Error, Graph, Result};

use super::{wdom_scores, DefenseResult};

/// Column handles of a DEF-MILP. Nodes outside the candidate set of a
/// pruned model have no `x` and no `w` column.
#[derive(Clone, Debug, PartialEq)]
pub struct DefMilpVars {
    pub x: Vec<Option<VarId>>,
    pub lambda0: VarId,
    pub q: Vec<VarId>,
    pub alpha: Vec<VarId>,
    /// Absent in the compact solve form.
    pub beta: Vec<Option<VarId>>,
    pub gamma: Vec<VarId>,
    pub w: Vec<Option<VarId>>,
    pub big_m: f64,
}

/// Weight of the closed out-neighborhood of each node. Some optimal dual
/// has every `α_j ≤ μ_j`, and then `q_i` never exceeds entry `i`.
pub(crate) fn node_m(g: &Graph) -> Vec<f64> {
    (0..g.n()).map(|i| dominated_by(g, i).into_iter().map(|j| g.weight(j)).sum::<f64>()).collect()
}

/// Largest weighted closed out-neighborhood: one constant valid for every
/// linearization row.
pub fn big_m(g: &Graph) -> f64 {
    node_m(g).into_iter().fold(0.0, f64::max)
}

pub(crate) fn build_def_model(
    g: &Graph,
    k_d: usize,
    k_a: usize,
    m_const: &[f64],
    candidate: &[bool],
    compact: bool,
) -> (Model, DefMilpVars) {
    let n = g.n();
    let inf = f64::INFINITY;
    let mut m = Model::new("def-milp", Sense::Minimize);
    // The compact form has the same optimum at every x, fractional or not.
    // `β_i` is dropped because `q_i` covers the same row at a cost of at
    // most one, with `q_i ≤ M_i` kept as a column bound. `w_i` is minimized
    // and only bounded below by `q_i - M_i x_i`, so its other three rows
    // never bind.
    let q_cap = |i: usize| if compact { m_const[i] } else { inf };
    let x: Vec<Option<VarId>> =
        (0..n).map(|i| candidate[i].then(|| m.binary(format!("x_{i}"), 0.0))).collect();
    let lambda0 = m.continuous("lambda0", 0.0, inf, k_a as f64);
    // A node that can never be blocked pays its q directly.
    let q: Vec<VarId> =
        (0..n).map(|i| m.continuous(format!("q_{i}"), 0.0, q_cap(i), if candidate[i] { 0.0 } else { 1.0 })).collect();
    let alpha: Vec<VarId> = (0..n).map(|i| m.continuous(format!("alpha_{i}"), 0.0, inf, 0.0)).collect();
    let beta: Vec<Option<VarId>> =
        (0..n).map(|i| (!compact).then(|| m.continuous(format!("beta_{i}"), 0.0, inf, 1.0))).collect();
    let gamma: Vec<VarId> = (0..n).map(|i| m.continuous(format!("gamma_{i}"), 0.0, inf, 1.0)).collect();
    let w: Vec<Option<VarId>> =
        (0..n).map(|i| candidate[i].then(|| m.continuous(format!("w_{i}"), 0.0, inf, 1.0))).collect();

    m.add_row("defense_budget", x.iter().flatten().map(|&v| (v, 1.0)), Cmp::Le, k_d as f64);
    for i in 0..n {
        let terms = [(lambda0, 1.0), (q[i], 1.0)]
            .into_iter()
            .chain(beta[i].map(|b| (b, 1.0)))
            .chain(dominated_by(g, i).into_iter().map(|j| (alpha[j], -1.0)));
        m.add_row(format!("ydual_{i}"), terms, Cmp::Ge, 0.0);
    }
    for i in 0..n {
        let mu = g.weight(i);
        let mut terms = vec![(alpha[i], 1.0), (gamma[i], 1.0)];
        if let Some(xi) = x[i] {
            terms.push((xi, mu));
        }
        m.add_row(format!("tdual_{i}"), terms, Cmp::Ge, mu);
    }
    for i in 0..n {
        let (Some(xi), Some(wi)) = (x[i], w[i]) else { continue };
        let big = m_const[i];
        if !compact {
            m.add_row(format!("w_cap_{i}"), [(wi, 1.0), (xi, big)], Cmp::Le, big);
            m.add_row(format!("w_floor_{i}"), [(wi, 1.0), (xi, -big)], Cmp::Ge, -big);
        }
        m.add_row(format!("w_q_lo_{i}"), [(wi, 1.0), (q[i], -1.0), (xi, big)], Cmp::Ge, 0.0);
        if !compact {
            m.add_row(format!("w_q_hi_{i}"), [(wi, 1.0), (q[i], -1.0), (xi, -big)], Cmp::Le, 0.0);
        }
    }
    let big_m = m_const.iter().copied().fold(0.0, f64::max);
    (m, DefMilpVars { x, lambda0, q, alpha, beta, gamma, w, big_m })
}

/// The single-level defender MILP: the attacker's relaxed best response
/// is replaced by its LP dual and the products `(1 - x_i) q_i` are
/// linearized with the constant `m_const`. Without one, node `i` gets its
/// own closed-neighborhood weight, which is never larger than [`big_m`].
pub fn build_def_milp(g: &Graph, k_d: usize, k_a: usize, m_const: Option<f64>) -> Result<(Model, DefMilpVars)> {
    if k_d > g.n() {
        return param(format!("defense budget {k_d} exceeds {} nodes", g.n()));
    }
    let m = match m_const {
        Some(c) => vec![c; g.n()],
        None => node_m(g),
    };
    Ok(build_def_model(g, k_d, k_a, &m, &vec![true; g.n()], false))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneOrder {
    Degree,
    Wdom,
}

pub(crate) fn degree_score(g: &Graph, v: usize) -> f64 {
    if g.is_directed() {
        (g.out_degree(v) + g.in_degree(v)) as f64
    } else {
        g.out_degree(v) as f64
    }
}

/// Indices of the `l` best scores, ties by lower index.
pub(crate) fn top_by_score(scores: &[f64], l: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order.truncate(l);
    order.sort_unstable();
    order
}

fn degenerate(g: &Graph, k_d: usize, k_a: usize, method: &str, params: serde_json::Value) -> Result<Option<DefenseResult>> {
    if k_a == 0 {
        let mut r = DefenseResult::new(BlockSet::new([], k_d)?, 0.0, method, params);
        r.diagnostics = Some("attack budget is zero".into());
        return Ok(Some(r));
    }
    if k_d == 0 {
        let bound = best_response_lp(g, &BlockSet::empty(), k_a)?;
        let mut r = DefenseResult::new(BlockSet::empty(), bound, method, params);
        r.diagnostics = Some("defense budget is zero".into());
        return Ok(Some(r));
    }
    Ok(None)
}

/// Full passes of the swap search that seeds the branch and bound.
const SWAP_PASSES: usize = 2;

/// A feasible DEF-MILP point for the blocks `blocked`: the model with `x`
/// fixed is a plain LP whose optimum is the relaxed best response there.
fn point_at(model: &Model, vars: &DefMilpVars, blocked: &[usize]) -> Option<Vec<f64>> {
    let mut fixed = model.clone();
    for (i, x) in vars.x.iter().enumerate() {
        if let Some(x) = x {
            let v = if blocked.contains(&i) { 1.0 } else { 0.0 };
            fixed.vars[x.0].lower = v;
            fixed.vars[x.0].upper = v;
        }
    }
    let res = optikit::solve_lp(&fixed);
    (res.status == optikit::Status::Optimal).then_some(res.values)
}

/// Best of the top WDom and top degree blocks among the candidates, then
/// improved by exchanging one blocked node for one unblocked candidate
/// while the relaxed best response drops.
fn heuristic_blocks(g: &Graph, k_d: usize, k_a: usize, candidate: &[bool]) -> Result<(Vec<usize>, f64)> {
    let pool: Vec<usize> = (0..g.n()).filter(|&i| candidate[i]).collect();
    let k = k_d.min(pool.len());
    let pick = |scores: Vec<f64>| {
        let restricted: Vec<f64> = pool.iter().map(|&i| scores[i]).collect();
        top_by_score(&restricted, k).into_iter().map(|p| pool[p]).collect::<Vec<usize>>()
    };
    let value = |b: &[usize]| best_response_lp(g, &BlockSet::exact(b.iter().copied()), k_a);
    let mut best: Option<(Vec<usize>, f64)> = None;
    for start in [pick(wdom_scores(g)), pick((0..g.n()).map(|v| degree_score(g, v)).collect())] {
        let v = value(&start)?;
        if best.as_ref().is_none_or(|(_, b)| v < *b - 1e-9) {
            best = Some((start, v));
        }
    }
    let (mut blocked, mut current) = best.expect("two starts were scored");
    for _ in 0..SWAP_PASSES {
        let mut improved = false;
        for slot in 0..blocked.len() {
            for &c in &pool {
                if blocked.contains(&c) {
                    continue;
                }
                let mut trial = blocked.clone();
                trial[slot] = c;
                let v = value(&trial)?;
                if v < current - 1e-9 {
                    blocked = trial;
                    current = v;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    blocked.sort_unstable();
    Ok((blocked, current))
}

fn solve_def(
    g: &Graph,
    k_d: usize,
    k_a: usize,
    candidate: &[bool],
    params: &MilpParams,
    method: &str,
    doc: serde_json::Value,
) -> Result<DefenseResult> {
    let started = Instant::now();
    if k_d > g.n() {
        return param(format!("defense budget {k_d} exceeds {} nodes", g.n()));
    }
    if let Some(r) = degenerate(g, k_d, k_a, method, doc.clone())? {
        return Ok(r);
    }
    let (model, vars) = build_def_model(g, k_d, k_a, &node_m(g), candidate, true);
    let (start_blocks, _) = heuristic_blocks(g, k_d, k_a, candidate)?;
    let start = point_at(&model, &vars, &start_blocks);
    let res = optikit::solve(&model, params, start.as_deref())?;
    if !res.has_solution() {
        return Err(Error::Solver(format!(
            "defender MILP ended with {:?}: {}",
            res.status,
            res.message.unwrap_or_default()
        )));
    }
    let blocked: Vec<usize> =
        (0..g.n()).filter(|&i| vars.x[i].is_some_and(|v| res.values[v.0] > 0.5)).collect();
    let blocked = BlockSet::new(blocked, k_d)?;
    let check = best_response_lp(g, &blocked, k_a)?;
    if (check - res.objective).abs() > 1e-5 * (1.0 + check.abs()) {
        return Err(Error::Solver(format!(
            "defender MILP objective {} disagrees with the relaxed best response {check} at its blocks",
            res.objective
        )));
    }
    let mut out = DefenseResult::new(blocked, res.objective, method, doc);
    out.status = Some(res.status);
    out.diagnostics = Some(format!(
        "{} nodes, {} simplex iterations, solver bound {:.6}",
        res.nodes, res.iterations, res.bound
    ));
    out.seconds = started.elapsed().as_secs_f64();
    Ok(out)
}

pub(crate) fn def_params() -> MilpParams {
    MilpParams::default()
}

/// Solve the DEF-MILP and return its blocks with the model objective as
/// bound.
pub fn def_milp(g: &Graph, k_d: usize, k_a: usize) -> Result<DefenseResult> {
    def_milp_with(g, k_d, k_a, &def_params())
}

pub fn def_milp_with(g: &Graph, k_d: usize, k_a: usize, params: &MilpParams) -> Result<DefenseResult> {
    let doc = json!({ "k_d": k_d, "k_a": k_a });
    solve_def(g, k_d, k_a, &vec![true; g.n()], params, "def-milp", doc)
}

/// DEF-MILP restricted to the `l_d` top-ranked nodes as blocking
/// candidates; every other node stays unblocked.
pub fn pruned_milp(g: &Graph, k_d: usize, k_a: usize, l_d: usize, order: PruneOrder) -> Result<DefenseResult> {
    if l_d < k_d {
        return param(format!("candidate set size {l_d} is below the defense budget {k_d}"));
    }
    let scores: Vec<f64> = match order {
        PruneOrder::Degree => (0..g.n()).map(|v| degree_score(g, v)).collect(),
        PruneOrder::Wdom => wdom_scores(g),
    };
    let mut candidate = vec![false; g.n()];
    for v in top_by_score(&scores, l_d.min(g.n())) {
        candidate[v] = true;
    }
    let doc = json!({ "k_d": k_d, "k_a": k_a, "l_d": l_d, "order": order });
    solve_def(g, k_d, k_a, &candidate, &def_params(), "pruned-milp", doc)
}
