//! The defender's side: which nodes (and edges) to remove before the
//! attacker seeds the network.

mod brute;
mod cg;
mod defmilp;
mod ev;

use serde::{Deserialize, Serialize};

use crate::netgraph::dominators_unchecked;
use crate::optikit::Status;
use crate::{BlockSet, Graph, Result};

pub use brute::{brute_force_defense, brute_force_ev_defense, DEFENSE_ENUMERATION_LIMIT};
pub use cg::{constraint_generation, CgIteration, CgLimits, CutPool, MasterSolver};
pub(crate) use defmilp::top_by_score;
pub use defmilp::{big_m, build_def_milp, def_milp, def_milp_with, pruned_milp, DefMilpVars, PruneOrder};
pub use ev::{build_ev_milp, ev_defense, EdgeNodePlan, EvMilpVars};

/// Outcome of a defense computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefenseResult {
    pub blocked: BlockSet,
    /// Removed edges, each as `(u, v)` with `u < v` when undirected.
    pub blocked_edges: Vec<(usize, usize)>,
    /// Predicted attacker utility at the returned blocks. For the MILP
    /// defenses this is the relaxed best response value, an upper bound on
    /// the exact one.
    pub bound: f64,
    pub method: String,
    pub params: serde_json::Value,
    pub iterations: Vec<CgIteration>,
    pub status: Option<Status>,
    pub diagnostics: Option<String>,
    pub seconds: f64,
}

#[derive(Serialize)]
struct DefenseDoc<'a> {
    blocked_nodes: &'a [usize],
    blocked_edges: &'a [(usize, usize)],
    bound: f64,
    method: &'a str,
    params: &'a serde_json::Value,
    iterations: &'a [CgIteration],
}

impl DefenseResult {
    pub(crate) fn new(blocked: BlockSet, bound: f64, method: &str, params: serde_json::Value) -> DefenseResult {
        DefenseResult {
            blocked,
            blocked_edges: Vec::new(),
            bound,
            method: method.into(),
            params,
            iterations: Vec::new(),
            status: None,
            diagnostics: None,
            seconds: 0.0,
        }
    }

    /// The interchange document: blocked nodes and edges, bound, method,
    /// parameters and the iteration log. Timing is left out so that equal
    /// runs produce equal bytes.
    pub fn to_json(&self) -> Result<String> {
        let doc = DefenseDoc {
            blocked_nodes: self.blocked.nodes(),
            blocked_edges: &self.blocked_edges,
            bound: self.bound,
            method: &self.method,
            params: &self.params,
            iterations: &self.iterations,
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }
}

/// `WDom_j`: total weight of the nodes that dominate `j`.
pub fn wdom_scores(g: &Graph) -> Vec<f64> {
    (0..g.n()).map(|j| dominators_unchecked(g, j).into_iter().map(|i| g.weight(i)).sum()).collect()
}

#[cfg(test)]
mod tests;
