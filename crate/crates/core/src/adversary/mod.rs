//! The attacker's side: given blocked nodes, choose seeds.
//!
//! Node weights `μ` come from the graph itself ([`Graph::weights`]); an
//! unweighted graph carries `μ ≡ 1`, so plain and weighted domination share
//! every code path here.

pub(crate) mod brute;
mod greedy;
mod milp;

use serde::{Deserialize, Serialize};

use crate::optikit::Status;
use crate::{BlockSet, Graph, Result, SeedSet};

pub use brute::{brute_force_br, BRUTE_FORCE_LIMIT};
pub use greedy::{celf_im, greedy_im_naive, greedy_kmaxvd, im_attack};
pub use milp::{best_response_lp, best_response_milp, build_br_dual, build_br_milp, BrDualVars, BrMilpVars};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttackMethod {
    /// Exact best response through BR-MILP.
    Milp,
    GreedyMaxVd,
    Celf,
    NaiveGreedy,
    BruteForce,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub seeds: SeedSet,
    /// Attacker utility: weighted domination, or estimated spread for the
    /// cascade attacks.
    pub value: f64,
    pub method: AttackMethod,
    /// Solver bound when the value comes from an optimization.
    pub bound: Option<f64>,
    pub status: Option<Status>,
    pub diagnostics: Option<String>,
}

impl AttackOutcome {
    fn plain(seeds: Vec<usize>, k_a: usize, value: f64, method: AttackMethod) -> AttackOutcome {
        AttackOutcome {
            seeds: SeedSet::new(seeds, k_a).expect("attack respects its budget"),
            value,
            method,
            bound: None,
            status: None,
            diagnostics: None,
        }
    }
}

/// Weighted domination `F(x, y)`: total weight of unblocked nodes with at
/// least one seed among their dominators.
pub fn eval_f(g: &Graph, x: &BlockSet, y: &SeedSet) -> Result<f64> {
    let blocked = x.mask(g.n())?;
    y.check_against(g.n(), x)?;
    Ok(domination_value(g, &blocked, y.nodes()))
}

pub(crate) fn domination_value(g: &Graph, blocked: &[bool], seeds: &[usize]) -> f64 {
    let mut hit = vec![false; g.n()];
    for &s in seeds {
        hit[s] = true;
        for &v in g.out_neighbors(s) {
            hit[v] = true;
        }
    }
    (0..g.n()).filter(|&v| hit[v] && !blocked[v]).map(|v| g.weight(v)).sum()
}

#[cfg(test)]
mod tests;
