use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversary::best_response_milp;
use crate::error::param;
use crate::netgraph::dominators_unchecked;
use crate::optikit::{self, Cmp, MilpParams, Model, Sense, Status, VarId};
use crate::{BlockSet, Error, Graph, Result};

use super::DefenseResult;

/// Tolerance added to the gap test so rounding cannot stall the loop.
const STOP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgIteration {
    pub iteration: usize,
    /// Master optimum: a lower bound on the defender's minimax value.
    pub master_value: f64,
    pub blocked: Vec<usize>,
    /// Exact best response value at `blocked`.
    pub br_value: f64,
    pub attack: Vec<usize>,
    pub cuts: usize,
}

/// How the master problem is solved. Both give the master optimum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MasterSolver {
    /// The master MILP through the configured solver backend.
    #[default]
    Milp,
    /// Direct search over block sets ([`CutPool::solve_exact`]).
    Search,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgLimits {
    pub max_iterations: usize,
    pub time_limit: Option<f64>,
    #[serde(default)]
    pub master: MasterSolver,
}

impl Default for CgLimits {
    fn default() -> Self {
        CgLimits { max_iterations: 10_000, time_limit: None, master: MasterSolver::Milp }
    }
}

/// Coverage terms of one cut: each node the attack reaches, with the
/// attack's seeds that dominate it.
#[derive(Clone, Debug)]
struct Cut {
    coverage: Vec<(usize, Vec<usize>)>,
}

impl Cut {
    fn value(&self, g: &Graph, blocked: &[bool]) -> f64 {
        self.coverage
            .iter()
            .filter(|(i, hitters)| !blocked[*i] && hitters.iter().any(|&j| !blocked[j]))
            .map(|(i, _)| g.weight(*i))
            .sum()
    }
}

/// Columns of a master model built over some of the cuts.
struct MasterVars {
    x: Vec<VarId>,
    z: VarId,
    /// `u` columns per included cut, parallel to that cut's coverage.
    u: Vec<(usize, Vec<VarId>)>,
}

/// The master problem: `min z` over blocks within budget, with one cut per
/// attack seen so far. Cut `t` has coverage columns `u_{i,t} ≥ μ_i (1 -
/// x_i - x_j)` for each seed `j` dominating `i`, and `z ≥ Σ_i u_{i,t}`, so
/// at integral `x` it scores the attack with blocked seeds dropped.
/// [`CutPool::model`] writes this out as a MILP. The loop solves it with
/// [`CutPool::solve_exact`], which searches block sets directly and agrees
/// with the MILP optimum.
#[derive(Clone, Debug)]
pub struct CutPool {
    n: usize,
    k_d: usize,
    attacks: Vec<Vec<usize>>,
    cuts: Vec<Cut>,
}

impl CutPool {
    pub fn new(g: &Graph, k_d: usize) -> CutPool {
        CutPool { n: g.n(), k_d, attacks: Vec::new(), cuts: Vec::new() }
    }

    pub fn attacks(&self) -> &[Vec<usize>] {
        &self.attacks
    }

    pub fn len(&self) -> usize {
        self.attacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attacks.is_empty()
    }

    pub fn contains(&self, attack: &[usize]) -> bool {
        self.attacks.iter().any(|a| a == attack)
    }

    /// The master over every cut.
    pub fn model(&self, g: &Graph) -> Model {
        let all: Vec<usize> = (0..self.cuts.len()).collect();
        self.build(g, &all).0
    }

    fn build(&self, g: &Graph, active: &[usize]) -> (Model, MasterVars) {
        let mut model = Model::new("cg-master", Sense::Minimize);
        let x: Vec<VarId> = (0..self.n).map(|i| model.binary(format!("x_{i}"), 0.0)).collect();
        let z = model.continuous("z", 0.0, f64::INFINITY, 1.0);
        model.add_row("defense_budget", x.iter().map(|&v| (v, 1.0)), Cmp::Le, self.k_d as f64);
        let mut u = Vec::with_capacity(active.len());
        for &t in active {
            let mut total = vec![(z, 1.0)];
            let mut cols = Vec::with_capacity(self.cuts[t].coverage.len());
            for (i, hitters) in &self.cuts[t].coverage {
                let i = *i;
                let mu = g.weight(i);
                let col = model.continuous(format!("u_{i}_{t}"), 0.0, f64::INFINITY, 0.0);
                for &j in hitters {
                    // add_row merges the two x_i terms when j == i.
                    let terms = [(col, 1.0), (x[i], mu), (x[j], mu)];
                    model.add_row(format!("cover_{i}_{t}_{j}"), terms, Cmp::Ge, mu);
                }
                total.push((col, -1.0));
                cols.push(col);
            }
            model.add_row(format!("cut_{t}"), total, Cmp::Ge, 0.0);
            u.push((t, cols));
        }
        (model, MasterVars { x, z, u })
    }

    pub fn add(&mut self, g: &Graph, attack: &[usize]) {
        let mut is_seed = vec![false; g.n()];
        for &s in attack {
            is_seed[s] = true;
        }
        let coverage = (0..g.n())
            .filter(|&i| g.weight(i) != 0.0)
            .filter_map(|i| {
                let hitters: Vec<usize> = dominators_unchecked(g, i).into_iter().filter(|&j| is_seed[j]).collect();
                (!hitters.is_empty()).then_some((i, hitters))
            })
            .collect();
        self.attacks.push(attack.to_vec());
        self.cuts.push(Cut { coverage });
    }

    /// Largest and total cut value at integral blocks.
    fn score(&self, g: &Graph, blocked: &[bool]) -> (f64, f64) {
        let mut worst: f64 = 0.0;
        let mut sum = 0.0;
        for cut in &self.cuts {
            let total = cut.value(g, blocked);
            worst = worst.max(total);
            sum += total;
        }
        (worst, sum)
    }

    /// Swap local search on the master: starting from `start` padded to
    /// `k_d` blocks, repeatedly take the single swap that most improves
    /// (largest cut, total over cuts) in lexicographic order.
    fn local_search(&self, g: &Graph, start: &[bool]) -> (f64, Vec<bool>) {
        let n = g.n();
        let mut blocked = start.to_vec();
        let mut count = blocked.iter().filter(|&&b| b).count();
        while count < self.k_d.min(n) {
            let mut best: Option<((f64, f64), usize)> = None;
            let free: Vec<usize> = (0..n).filter(|&v| !blocked[v]).collect();
            for v in free {
                blocked[v] = true;
                let s = self.score(g, &blocked);
                blocked[v] = false;
                if best.is_none_or(|(b, _)| lex_less(s, b)) {
                    best = Some((s, v));
                }
            }
            blocked[best.expect("a free node exists").1] = true;
            count += 1;
        }
        let mut current = self.score(g, &blocked);
        loop {
            let mut best: Option<((f64, f64), usize, usize)> = None;
            let inside: Vec<usize> = (0..n).filter(|&v| blocked[v]).collect();
            for out in inside {
                blocked[out] = false;
                let outside: Vec<usize> = (0..n).filter(|&v| !blocked[v] && v != out).collect();
                for inn in outside {
                    blocked[inn] = true;
                    let s = self.score(g, &blocked);
                    blocked[inn] = false;
                    if lex_less(s, best.map_or(current, |b| b.0)) {
                        best = Some((s, out, inn));
                    }
                }
                blocked[out] = true;
            }
            match best {
                Some((s, out, inn)) => {
                    blocked[out] = false;
                    blocked[inn] = true;
                    current = s;
                }
                None => return (current.0, blocked),
            }
        }
    }

    fn point(&self, g: &Graph, vars: &MasterVars, num_vars: usize, blocked: &[bool]) -> (f64, Vec<f64>) {
        let mut values = vec![0.0; num_vars];
        for (i, &b) in blocked.iter().enumerate() {
            values[vars.x[i].0] = if b { 1.0 } else { 0.0 };
        }
        let mut z: f64 = 0.0;
        for (t, cols) in &vars.u {
            let mut total = 0.0;
            for ((i, hitters), col) in self.cuts[*t].coverage.iter().zip(cols) {
                let live = !blocked[*i] && hitters.iter().any(|&j| !blocked[j]);
                let val = if live { g.weight(*i) } else { 0.0 };
                values[col.0] = val;
                total += val;
            }
            z = z.max(total);
        }
        values[vars.z.0] = z;
        (z, values)
    }

    /// Master value of integral blocks, with the matching point of
    /// [`CutPool::model`].
    pub fn evaluate(&self, g: &Graph, blocked: &[bool]) -> (f64, Vec<f64>) {
        let all: Vec<usize> = (0..self.cuts.len()).collect();
        let (model, vars) = self.build(g, &all);
        self.point(g, &vars, model.num_vars(), blocked)
    }

    /// Upper bound on what blocking `v` can remove from each cut: `v`
    /// itself when covered, plus every node `v` dominates. Any node lost
    /// to a block set is charged to a blocked node, so these add up to a
    /// bound on the loss from any set.
    fn charges(&self, g: &Graph) -> Vec<Vec<f64>> {
        let mut charge = vec![vec![0.0; self.cuts.len()]; self.n];
        for (t, cut) in self.cuts.iter().enumerate() {
            for (i, hitters) in &cut.coverage {
                let mu = g.weight(*i);
                charge[*i][t] += mu;
                for &j in hitters {
                    if j != *i {
                        charge[j][t] += mu;
                    }
                }
            }
        }
        charge
    }

    /// Exact master optimum by depth-first search over block sets, seeded
    /// with the incumbent `start`. Values only fall as nodes are blocked,
    /// so only sets of the full budget are scored. The bound at a partial
    /// set takes, per cut, its current value less the largest charges the
    /// remaining picks could make. Returns the best set, its value, and
    /// whether the search finished before `deadline`.
    pub fn solve_exact(
        &self,
        g: &Graph,
        start: &[bool],
        integral: bool,
        deadline: Option<Instant>,
    ) -> (f64, Vec<bool>, bool) {
        let charge = self.charges(g);
        let mut cands: Vec<usize> = (0..self.n).filter(|&v| charge[v].iter().any(|&c| c > 0.0)).collect();
        let total = |v: usize| charge[v].iter().sum::<f64>();
        cands.sort_by(|&a, &b| total(b).total_cmp(&total(a)).then(a.cmp(&b)));
        let mut search = Search {
            pool: self,
            g,
            charge: &charge,
            cands: &cands,
            picks: self.k_d.min(cands.len()),
            margin: if integral { 1.0 - 1e-6 } else { STOP_TOL },
            best: (self.score(g, start).0, start.to_vec()),
            blocked: vec![false; self.n],
            visited: 0,
            deadline,
            timed_out: false,
        };
        search.descend(0, 0);
        let (value, blocked) = search.best;
        (value, blocked, !search.timed_out)
    }
}

struct Search<'a> {
    pool: &'a CutPool,
    g: &'a Graph,
    charge: &'a [Vec<f64>],
    cands: &'a [usize],
    picks: usize,
    /// Improvement a branch must be able to make to stay open.
    margin: f64,
    best: (f64, Vec<bool>),
    blocked: Vec<bool>,
    visited: usize,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize, from: usize) {
        self.visited += 1;
        if self.visited.is_multiple_of(512) && self.deadline.is_some_and(|d| Instant::now() > d) {
            self.timed_out = true;
        }
        if self.timed_out {
            return;
        }
        if depth == self.picks {
            let value = self.pool.score(self.g, &self.blocked).0;
            if value < self.best.0 - STOP_TOL {
                self.best = (value, self.blocked.clone());
            }
            return;
        }
        let left = self.picks - depth;
        let mut bound: f64 = 0.0;
        let mut top = Vec::with_capacity(self.cands.len() - from);
        for (t, cut) in self.pool.cuts.iter().enumerate() {
            top.clear();
            top.extend(self.cands[from..].iter().map(|&v| self.charge[v][t]));
            let k = left.min(top.len());
            if k < top.len() {
                top.select_nth_unstable_by(k, |a, b| b.total_cmp(a));
            }
            let drop: f64 = top[..k].iter().sum();
            bound = bound.max(cut.value(self.g, &self.blocked) - drop);
            if bound > self.best.0 - self.margin {
                return;
            }
        }
        // Leave enough candidates to fill the budget.
        for j in from..=self.cands.len() - left {
            let v = self.cands[j];
            self.blocked[v] = true;
            self.descend(depth + 1, j + 1);
            self.blocked[v] = false;
        }
    }
}

fn lex_less(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.0 - 1e-9 || (a.0 <= b.0 + 1e-9 && a.1 < b.1 - 1e-9)
}

/// Constraint generation: alternate between the master over collected
/// attacks and an exact best response, stopping once the best response at
/// the master's blocks is within `gap` of the master value.
pub fn constraint_generation(g: &Graph, k_d: usize, k_a: usize, gap: f64, limits: &CgLimits) -> Result<DefenseResult> {
    let started = Instant::now();
    if !(gap >= 0.0) {
        return param(format!("gap must be nonnegative, got {gap}"));
    }
    if k_d > g.n() {
        return param(format!("defense budget {k_d} exceeds {} nodes", g.n()));
    }
    let doc = json!({ "k_d": k_d, "k_a": k_a, "gap": gap });
    let integral = g.has_unit_weights();
    let mut pool = CutPool::new(g, k_d);
    let mut blocked = vec![false; g.n()];
    let mut z_hat = 0.0;
    let mut log = Vec::new();
    let mut best: Option<(f64, Vec<bool>)> = None;
    loop {
        let x = BlockSet::new((0..g.n()).filter(|&i| blocked[i]), k_d)?;
        let attack = best_response_milp(g, &x, k_a)?;
        let v = attack.value;
        log.push(CgIteration {
            iteration: log.len() + 1,
            master_value: z_hat,
            blocked: x.nodes().to_vec(),
            br_value: v,
            attack: attack.seeds.nodes().to_vec(),
            cuts: pool.len(),
        });
        log::debug!("cg iteration {}: master {z_hat:.4}, best response {v:.4}", log.len());
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, blocked.clone()));
        }
        if v <= z_hat + gap + STOP_TOL {
            let mut out = DefenseResult::new(x, v, "cg", doc);
            out.iterations = log;
            out.status = Some(Status::Optimal);
            out.seconds = started.elapsed().as_secs_f64();
            return Ok(out);
        }
        let out_of_time = limits.time_limit.is_some_and(|t| started.elapsed().as_secs_f64() > t);
        if log.len() >= limits.max_iterations || out_of_time {
            let (v, b) = best.expect("one iteration ran");
            let x = BlockSet::new((0..g.n()).filter(|&i| b[i]), k_d)?;
            let mut out = DefenseResult::new(x, v, "cg", doc);
            out.diagnostics = Some(format!("stopped with interval [{z_hat}, {v}]"));
            out.iterations = log;
            out.status = Some(Status::FeasibleWithGap);
            out.seconds = started.elapsed().as_secs_f64();
            return Ok(out);
        }
        if !pool.contains(attack.seeds.nodes()) {
            pool.add(g, attack.seeds.nodes());
        }
        // The new master optimum is at least the old one, so a local
        // search that reaches the old value has solved the master.
        let mut found = pool.local_search(g, &blocked);
        if let Some((_, b)) = &best {
            let other = pool.local_search(g, b);
            if other.0 < found.0 {
                found = other;
            }
        }
        if found.0 <= z_hat + STOP_TOL {
            blocked = found.1;
            continue;
        }
        let lower = match limits.master {
            MasterSolver::Search => {
                let deadline = limits.time_limit.map(|t| started + std::time::Duration::from_secs_f64(t));
                let (value, next, finished) = pool.solve_exact(g, &found.1, integral, deadline);
                blocked = next;
                // A search cut short by the deadline proves nothing new.
                if finished { value } else { z_hat }
            }
            MasterSolver::Milp => {
                let mut params = if integral { MilpParams::integral_objective() } else { MilpParams::default() };
                if let Some(t) = limits.time_limit {
                    params.time_limit = Some((t - started.elapsed().as_secs_f64()).max(0.0));
                }
                let all: Vec<usize> = (0..pool.len()).collect();
                let (model, vars) = pool.build(g, &all);
                let start = pool.point(g, &vars, model.num_vars(), &found.1).1;
                let res = optikit::solve(&model, &params, Some(&start))?;
                if !res.has_solution() {
                    return Err(Error::Solver(format!("master problem ended with {:?}", res.status)));
                }
                blocked = vars.x.iter().map(|v| res.values[v.0] > 0.5).collect();
                if res.status == Status::Optimal { res.objective } else { res.bound }
            }
        };
        // The master optimum can only grow as cuts accumulate.
        z_hat = lower.max(z_hat);
    }
}
