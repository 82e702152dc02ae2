use crate::netgraph::{dominated_by, dominators_unchecked};
use crate::optikit::{self, Cmp, MilpParams, Model, Sense, VarId};
use crate::{BlockSet, Error, Graph, Result};

use super::{domination_value, greedy_kmaxvd, AttackMethod, AttackOutcome};
use crate::SeedSet;

/// Column handles of a BR-MILP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrMilpVars {
    /// Seed choice per node.
    pub y: Vec<VarId>,
    /// Coverage per node, continuous in `[0, 1]`.
    pub t: Vec<VarId>,
}

/// Attacker best response as a MILP:
/// `max Σ μ_i (1 - x_i) t_i` subject to `y_i ≤ 1 - x_i`, `Σ y ≤ k_A` and
/// `t_i ≤ Σ_{j dominating i} y_j`.
pub fn build_br_milp(g: &Graph, x: &BlockSet, k_a: usize) -> Result<(Model, BrMilpVars)> {
    let blocked = x.mask(g.n())?;
    let n = g.n();
    let mut m = Model::new("br-milp", Sense::Maximize);
    let y: Vec<VarId> = (0..n).map(|i| m.binary(format!("y_{i}"), 0.0)).collect();
    let t: Vec<VarId> = (0..n)
        .map(|i| {
            let free = if blocked[i] { 0.0 } else { 1.0 };
            m.continuous(format!("t_{i}"), 0.0, 1.0, g.weight(i) * free)
        })
        .collect();
    for i in 0..n {
        let rhs = if blocked[i] { 0.0 } else { 1.0 };
        m.add_row(format!("seedable_{i}"), [(y[i], 1.0)], Cmp::Le, rhs);
    }
    m.add_row("attack_budget", y.iter().map(|&v| (v, 1.0)), Cmp::Le, k_a as f64);
    for i in 0..n {
        let terms = std::iter::once((t[i], 1.0)).chain(dominators_unchecked(g, i).into_iter().map(|j| (y[j], -1.0)));
        m.add_row(format!("cover_{i}"), terms, Cmp::Le, 0.0);
    }
    Ok((m, BrMilpVars { y, t }))
}

pub(crate) fn br_params(g: &Graph) -> MilpParams {
    if g.has_unit_weights() {
        MilpParams::integral_objective()
    } else {
        MilpParams { abs_gap: 1e-9, rel_gap: 1e-12, ..MilpParams::default() }
    }
}

/// Exact k-MaxVD best response against `x`.
pub fn best_response_milp(g: &Graph, x: &BlockSet, k_a: usize) -> Result<AttackOutcome> {
    let (model, vars) = build_br_milp(g, x, k_a)?;
    let blocked = x.mask(g.n())?;
    // The greedy answer is a feasible starting incumbent.
    let warm = greedy_kmaxvd(g, x, k_a)?;
    let mut start = vec![0.0; model.num_vars()];
    for &s in warm.seeds.nodes() {
        start[vars.y[s].0] = 1.0;
    }
    let hit = super::greedy::covered(g, warm.seeds.nodes());
    for i in 0..g.n() {
        start[vars.t[i].0] = if hit[i] { 1.0 } else { 0.0 };
    }
    let res = optikit::solve(&model, &br_params(g), Some(&start))?;
    if !res.has_solution() {
        return Err(Error::Solver(format!(
            "best response solve ended with {:?}: {}",
            res.status,
            res.message.unwrap_or_default()
        )));
    }
    let seeds: Vec<usize> = (0..g.n()).filter(|&i| res.values[vars.y[i].0] > 0.5 && !blocked[i]).collect();
    let value = domination_value(g, &blocked, &seeds);
    Ok(AttackOutcome {
        seeds: SeedSet::new(seeds, k_a)?,
        value,
        method: AttackMethod::Milp,
        bound: Some(res.bound.max(value)),
        status: Some(res.status),
        diagnostics: Some(format!("{} nodes, {} simplex iterations", res.nodes, res.iterations)),
    })
}

/// Optimum of the LP relaxation of the BR-MILP.
pub fn best_response_lp(g: &Graph, x: &BlockSet, k_a: usize) -> Result<f64> {
    let (model, _) = build_br_milp(g, x, k_a)?;
    let res = optikit::solve_lp(&model.relaxed());
    match res.status {
        optikit::Status::Optimal => Ok(res.objective),
        s => Err(Error::Solver(format!("relaxed best response ended with {s:?}"))),
    }
}

/// Column handles of the dual of the relaxed best response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrDualVars {
    /// Budget row.
    pub lambda0: VarId,
    /// Rows `y_i ≤ 1 - x_i`.
    pub q: Vec<VarId>,
    /// Coverage rows.
    pub alpha: Vec<VarId>,
    /// Bounds `y_i ≤ 1`.
    pub beta: Vec<VarId>,
    /// Bounds `t_i ≤ 1`.
    pub gamma: Vec<VarId>,
}

/// The LP dual of the relaxed best response at fixed `x`:
/// `min k_A λ0 + Σ (1 - x_i) q_i + Σ β_i + Σ γ_i` subject to
/// `λ0 + q_i + β_i - Σ_{j dominated by i} α_j ≥ 0` and
/// `α_i + γ_i ≥ μ_i (1 - x_i)`, all variables nonnegative.
pub fn build_br_dual(g: &Graph, x: &BlockSet, k_a: usize) -> Result<(Model, BrDualVars)> {
    let blocked = x.mask(g.n())?;
    let n = g.n();
    let inf = f64::INFINITY;
    let mut m = Model::new("br-dual", Sense::Minimize);
    let lambda0 = m.continuous("lambda0", 0.0, inf, k_a as f64);
    let q: Vec<VarId> =
        (0..n).map(|i| m.continuous(format!("q_{i}"), 0.0, inf, if blocked[i] { 0.0 } else { 1.0 })).collect();
    let alpha: Vec<VarId> = (0..n).map(|i| m.continuous(format!("alpha_{i}"), 0.0, inf, 0.0)).collect();
    let beta: Vec<VarId> = (0..n).map(|i| m.continuous(format!("beta_{i}"), 0.0, inf, 1.0)).collect();
    let gamma: Vec<VarId> = (0..n).map(|i| m.continuous(format!("gamma_{i}"), 0.0, inf, 1.0)).collect();
    for i in 0..n {
        let terms = [(lambda0, 1.0), (q[i], 1.0), (beta[i], 1.0)]
            .into_iter()
            .chain(dominated_by(g, i).into_iter().map(|j| (alpha[j], -1.0)));
        m.add_row(format!("ydual_{i}"), terms, Cmp::Ge, 0.0);
    }
    for i in 0..n {
        let rhs = if blocked[i] { 0.0 } else { g.weight(i) };
        m.add_row(format!("tdual_{i}"), [(alpha[i], 1.0), (gamma[i], 1.0)], Cmp::Ge, rhs);
    }
    Ok((m, BrDualVars { lambda0, q, alpha, beta, gamma }))
}
