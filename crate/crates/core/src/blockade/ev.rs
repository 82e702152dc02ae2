use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversary::best_response_lp;
use crate::error::param;
use crate::netgraph::dominated_by;
use crate::optikit::{self, Cmp, Model, Sense, VarId};
use crate::{BlockSet, Error, Graph, Result};

use super::defmilp::{def_params, node_m};
use super::DefenseResult;

/// A joint node and edge blocking decision with its price.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeNodePlan {
    pub nodes: BlockSet,
    pub edges: Vec<(usize, usize)>,
    pub node_cost: f64,
    pub edge_cost: f64,
    pub budget: f64,
}

impl EdgeNodePlan {
    pub fn cost(&self) -> f64 {
        self.nodes.len() as f64 * self.node_cost + self.edges.len() as f64 * self.edge_cost
    }

    /// True when some blocked edge touches a blocked node.
    pub fn has_redundant_edge(&self) -> bool {
        self.edges.iter().any(|&(u, v)| self.nodes.contains(u) || self.nodes.contains(v))
    }

    pub fn from_result(r: &DefenseResult, node_cost: f64, edge_cost: f64, budget: f64) -> EdgeNodePlan {
        EdgeNodePlan { nodes: r.blocked.clone(), edges: r.blocked_edges.clone(), node_cost, edge_cost, budget }
    }
}

/// Column handles of an EV-MILP. Edge `e` is `edges[e]`; arc columns `b`
/// are listed with their tail, head and edge.
#[derive(Clone, Debug, PartialEq)]
pub struct EvMilpVars {
    pub x: Vec<VarId>,
    pub edges: Vec<(usize, usize)>,
    pub z: Vec<VarId>,
    pub k: Vec<VarId>,
    pub arcs: Vec<(usize, usize, usize)>,
    pub b: Vec<VarId>,
    pub lambda0: VarId,
    pub q: Vec<VarId>,
    pub alpha: Vec<VarId>,
    pub beta: Vec<VarId>,
    pub gamma: Vec<VarId>,
    pub w: Vec<VarId>,
    pub big_m: f64,
}

/// Defender MILP with node cost `c_n`, edge cost `c_e` and budget `b_d`.
/// The arc `i -> j` contributes `b_ij = α_j (1 - z_ij)` to the seed row of
/// `i`; one `z` per undirected edge covers both of its arcs.
pub fn build_ev_milp(
    g: &Graph,
    c_n: f64,
    c_e: f64,
    b_d: f64,
    k_a: usize,
    m_const: Option<f64>,
) -> Result<(Model, EvMilpVars)> {
    if !(c_n > 0.0 && c_e > 0.0) {
        return param(format!("blocking costs must be positive (node {c_n}, edge {c_e})"));
    }
    if !(b_d >= 0.0) {
        return param(format!("budget must be nonnegative, got {b_d}"));
    }
    let n = g.n();
    // Without an explicit constant, w rows use the node's closed-neighborhood
    // weight and the rows of arc i -> j use μ_j, both bounds on some optimal
    // dual.
    let (node_big, head_big): (Vec<f64>, Vec<f64>) = match m_const {
        Some(c) => (vec![c; n], vec![c; n]),
        None => (node_m(g), g.weights().to_vec()),
    };
    let big = node_big.iter().copied().fold(0.0, f64::max);
    // The coupling rows only need a constant of at least one.
    let couple = big.max(1.0);
    let inf = f64::INFINITY;
    let mut m = Model::new("ev-milp", Sense::Minimize);
    let x: Vec<VarId> = (0..n).map(|i| m.binary(format!("x_{i}"), 0.0)).collect();
    let edges = g.edges();
    let z: Vec<VarId> = edges.iter().map(|&(u, v)| m.binary(format!("z_{u}_{v}"), 0.0)).collect();
    let k: Vec<VarId> = edges.iter().map(|&(u, v)| m.binary(format!("k_{u}_{v}"), 0.0)).collect();
    let lambda0 = m.continuous("lambda0", 0.0, inf, k_a as f64);
    let q: Vec<VarId> = (0..n).map(|i| m.continuous(format!("q_{i}"), 0.0, inf, 0.0)).collect();
    let alpha: Vec<VarId> = (0..n).map(|i| m.continuous(format!("alpha_{i}"), 0.0, inf, 0.0)).collect();
    let beta: Vec<VarId> = (0..n).map(|i| m.continuous(format!("beta_{i}"), 0.0, inf, 1.0)).collect();
    let gamma: Vec<VarId> = (0..n).map(|i| m.continuous(format!("gamma_{i}"), 0.0, inf, 1.0)).collect();
    let w: Vec<VarId> = (0..n).map(|i| m.continuous(format!("w_{i}"), 0.0, inf, 1.0)).collect();

    let mut edge_of = std::collections::HashMap::new();
    for (e, &(u, v)) in edges.iter().enumerate() {
        edge_of.insert((u, v), e);
        if !g.is_directed() {
            edge_of.insert((v, u), e);
        }
    }
    let arcs: Vec<(usize, usize, usize)> = g.arcs().map(|(i, j)| (i, j, edge_of[&(i, j)])).collect();
    let b: Vec<VarId> = arcs.iter().map(|&(i, j, _)| m.continuous(format!("b_{i}_{j}"), 0.0, inf, 0.0)).collect();

    let budget_terms = x.iter().map(|&v| (v, c_n)).chain(z.iter().map(|&v| (v, c_e)));
    m.add_row("defense_budget", budget_terms, Cmp::Le, b_d);
    let mut out_arcs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, &(i, _, _)) in arcs.iter().enumerate() {
        out_arcs[i].push(a);
    }
    for i in 0..n {
        debug_assert_eq!(out_arcs[i].len() + 1, dominated_by(g, i).len());
        let terms = [(lambda0, 1.0), (q[i], 1.0), (beta[i], 1.0), (alpha[i], -1.0)]
            .into_iter()
            .chain(out_arcs[i].iter().map(|&a| (b[a], -1.0)));
        m.add_row(format!("ydual_{i}"), terms, Cmp::Ge, 0.0);
    }
    for i in 0..n {
        let mu = g.weight(i);
        m.add_row(format!("tdual_{i}"), [(alpha[i], 1.0), (gamma[i], 1.0), (x[i], mu)], Cmp::Ge, mu);
    }
    for (a, &(i, j, e)) in arcs.iter().enumerate() {
        let (ba, ze, big) = (b[a], z[e], head_big[j]);
        m.add_row(format!("b_cap_{i}_{j}"), [(ba, 1.0), (ze, big)], Cmp::Le, big);
        m.add_row(format!("b_floor_{i}_{j}"), [(ba, 1.0), (ze, -big)], Cmp::Ge, -big);
        m.add_row(format!("b_hi_{i}_{j}"), [(ba, 1.0), (alpha[j], -1.0), (ze, -big)], Cmp::Le, 0.0);
        m.add_row(format!("b_lo_{i}_{j}"), [(ba, 1.0), (alpha[j], -1.0), (ze, big)], Cmp::Ge, 0.0);
    }
    for (e, &(u, v)) in edges.iter().enumerate() {
        m.add_row(format!("edge_pick_{u}_{v}"), [(z[e], 1.0), (k[e], -couple)], Cmp::Le, 0.5);
        m.add_row(format!("edge_tail_{u}_{v}"), [(x[u], 1.0), (k[e], couple)], Cmp::Le, couple + 0.5);
        m.add_row(format!("edge_head_{u}_{v}"), [(x[v], 1.0), (k[e], couple)], Cmp::Le, couple + 0.5);
    }
    for i in 0..n {
        let big = node_big[i];
        m.add_row(format!("w_cap_{i}"), [(w[i], 1.0), (x[i], big)], Cmp::Le, big);
        m.add_row(format!("w_floor_{i}"), [(w[i], 1.0), (x[i], -big)], Cmp::Ge, -big);
        m.add_row(format!("w_q_lo_{i}"), [(w[i], 1.0), (q[i], -1.0), (x[i], big)], Cmp::Ge, 0.0);
        m.add_row(format!("w_q_hi_{i}"), [(w[i], 1.0), (q[i], -1.0), (x[i], -big)], Cmp::Le, 0.0);
    }
    let vars = EvMilpVars { x, edges, z, k, arcs, b, lambda0, q, alpha, beta, gamma, w, big_m: big };
    Ok((m, vars))
}

/// Solve the EV-MILP. The result lists blocked nodes and edges; its bound
/// is the model objective.
pub fn ev_defense(g: &Graph, c_n: f64, c_e: f64, b_d: f64, k_a: usize) -> Result<DefenseResult> {
    let started = Instant::now();
    let doc = json!({ "c_n": c_n, "c_e": c_e, "b_d": b_d, "k_a": k_a });
    let (model, vars) = build_ev_milp(g, c_n, c_e, b_d, k_a, None)?;
    if b_d < c_n.min(c_e) || k_a == 0 {
        let bound = if k_a == 0 { 0.0 } else { best_response_lp(g, &BlockSet::empty(), k_a)? };
        return Ok(DefenseResult::new(BlockSet::empty(), bound, "ev-milp", doc));
    }
    let res = optikit::solve(&model, &def_params(), None)?;
    if !res.has_solution() {
        return Err(Error::Solver(format!("edge-node MILP ended with {:?}", res.status)));
    }
    let nodes: Vec<usize> = (0..g.n()).filter(|&i| res.values[vars.x[i].0] > 0.5).collect();
    let edges: Vec<(usize, usize)> =
        vars.edges.iter().zip(&vars.z).filter(|(_, z)| res.values[z.0] > 0.5).map(|(&e, _)| e).collect();
    let blocked = BlockSet::exact(nodes);
    let check = best_response_lp(&g.without_edges(&edges)?, &blocked, k_a)?;
    if (check - res.objective).abs() > 1e-5 * (1.0 + check.abs()) {
        return Err(Error::Solver(format!(
            "edge-node MILP objective {} disagrees with the relaxed best response {check} at its plan",
            res.objective
        )));
    }
    let mut out = DefenseResult::new(blocked, res.objective, "ev-milp", doc);
    out.blocked_edges = edges;
    out.status = Some(res.status);
    out.diagnostics = Some(format!("{} nodes, {} simplex iterations", res.nodes, res.iterations));
    out.seconds = started.elapsed().as_secs_f64();
    Ok(out)
}
