use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use super::model::{MilpParams, Model, SolveResult, Status, VarKind};
use super::simplex::{LpData, LpOutcome, Simplex};

const INT_TOL: f64 = 1e-6;
/// A subtree is followed without consulting the heap while its bound lies
/// within this fraction of the gap between the best open bound and the
/// incumbent.
const PLUNGE: f64 = 0.5;

fn iteration_cap(model: &Model) -> usize {
    20_000 + 50 * (model.num_vars() + model.num_rows())
}

/// Solve the continuous relaxation of `model`.
pub fn solve_lp(model: &Model) -> SolveResult {
    let started = Instant::now();
    if let Err(e) = model.validate() {
        return SolveResult::without_solution(Status::LimitReached, Some(e.to_string()));
    }
    let mut s = Simplex::new(LpData::from_model(model));
    let outcome = s.solve(iteration_cap(model));
    let mut res = lp_result(model, &s, outcome);
    res.seconds = started.elapsed().as_secs_f64();
    res
}

fn lp_result(model: &Model, s: &Simplex, outcome: LpOutcome) -> SolveResult {
    let mut res = match outcome {
        LpOutcome::Optimal => {
            let values = s.values();
            let objective = model.objective_value(&values);
            SolveResult {
                status: Status::Optimal,
                objective,
                values,
                duals: Some(s.duals()),
                reduced_costs: Some(s.reduced_costs()),
                bound: objective,
                nodes: 0,
                iterations: 0,
                seconds: 0.0,
                message: None,
            }
        }
        LpOutcome::Infeasible => SolveResult::without_solution(Status::Infeasible, None),
        LpOutcome::Unbounded => SolveResult::without_solution(Status::Unbounded, None),
        LpOutcome::IterationLimit => SolveResult::without_solution(
            Status::LimitReached,
            Some(format!("simplex stopped after {} iterations (residual {:.2e})", s.iterations, s.residual())),
        ),
    };
    res.iterations = s.iterations;
    res
}

#[derive(Clone, Debug)]
struct Node {
    id: usize,
    depth: usize,
    /// Parent relaxation value in minimization form.
    bound: f64,
    fixings: Vec<(usize, f64)>,
    /// Binary position, direction (true for up) and distance moved by the
    /// branching that created this node.
    branched: Option<(usize, bool, f64)>,
}

/// Average objective change per unit of movement, per binary and
/// direction.
struct Pseudocosts {
    sum: [Vec<f64>; 2],
    count: [Vec<usize>; 2],
}

impl Pseudocosts {
    fn new(k: usize) -> Pseudocosts {
        Pseudocosts { sum: [vec![0.0; k], vec![0.0; k]], count: [vec![0; k], vec![0; k]] }
    }

    fn record(&mut self, k: usize, up: bool, per_unit: f64) {
        self.sum[up as usize][k] += per_unit;
        self.count[up as usize][k] += 1;
    }

    /// Per-unit estimate, falling back to the mean over observed binaries.
    fn estimate(&self, k: usize, up: bool) -> f64 {
        let d = up as usize;
        if self.count[d][k] > 0 {
            return self.sum[d][k] / self.count[d][k] as f64;
        }
        let (mut total, mut seen) = (0.0, 0usize);
        for (s, &c) in self.sum[d].iter().zip(&self.count[d]) {
            if c > 0 {
                total += s / c as f64;
                seen += 1;
            }
        }
        if seen == 0 {
            1.0
        } else {
            total / seen as f64
        }
    }
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // Max-heap order: lowest bound first, then deeper, then older.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

/// Open nodes: a stack while diving for a first incumbent, a best-bound
/// heap afterwards.
enum Frontier {
    Dive(Vec<Node>),
    Best(BinaryHeap<Node>),
}

impl Frontier {
    fn pop(&mut self) -> Option<Node> {
        match self {
            Frontier::Dive(v) => v.pop(),
            Frontier::Best(h) => h.pop(),
        }
    }

    fn min_bound(&self) -> f64 {
        match self {
            Frontier::Dive(v) => v.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min),
            Frontier::Best(h) => h.peek().map_or(f64::INFINITY, |n| n.bound),
        }
    }

    fn to_best(&mut self) {
        if let Frontier::Dive(v) = self {
            *self = Frontier::Best(v.drain(..).collect());
        }
    }
}

/// Branch-and-bound over the binary variables of `model`.
pub fn solve_milp(model: &Model, params: &MilpParams) -> SolveResult {
    solve_milp_with_start(model, params, None)
}

/// As [`solve_milp`], seeded with a known feasible point. An infeasible
/// start is ignored.
pub fn solve_milp_with_start(model: &Model, params: &MilpParams, start: Option<&[f64]>) -> SolveResult {
    let started = Instant::now();
    if model.num_binaries() == 0 {
        let mut r = solve_lp(model);
        r.nodes = 1;
        return r;
    }
    if let Err(e) = model.validate() {
        return SolveResult::without_solution(Status::LimitReached, Some(e.to_string()));
    }
    let binaries: Vec<usize> =
        (0..model.num_vars()).filter(|&j| model.vars[j].kind == VarKind::Binary).collect();
    let lp = LpData::from_model(model);
    let sign = lp.sign;
    let root_bounds: Vec<(f64, f64)> = binaries.iter().map(|&j| (lp.lower[j], lp.upper[j])).collect();
    let cap = iteration_cap(model);
    let mut s = Simplex::new(lp);

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if let Some(x) = start {
        if x.len() == model.num_vars()
            && super::check::check_solution(model, x, 1e-6).map(|v| v.is_empty()).unwrap_or(false)
        {
            incumbent = Some((sign * model.objective_value(x), x.to_vec()));
        }
    }
    let tolerance = |inc: f64| params.abs_gap.max(params.rel_gap * inc.abs());

    let mut frontier = if incumbent.is_some() {
        Frontier::Best(BinaryHeap::new())
    } else {
        Frontier::Dive(Vec::new())
    };
    let root = Node { id: 0, depth: 0, bound: f64::NEG_INFINITY, fixings: Vec::new(), branched: None };
    let mut costs = Pseudocosts::new(binaries.len());
    let mut next_id = 1;
    let mut pending = Some(root);
    let mut nodes = 0usize;
    // Smallest relaxation value among nodes discarded by the gap tolerance.
    let mut pruned_bound = f64::INFINITY;
    let mut limit_hit: Option<String> = None;
    let mut numeric_trouble = false;

    while let Some(node) = pending.take().or_else(|| frontier.pop()) {
        if let Some((inc, _)) = &incumbent {
            if node.bound >= *inc - tolerance(*inc) {
                pruned_bound = pruned_bound.min(node.bound);
                continue;
            }
        }
        if nodes >= params.node_limit {
            limit_hit = Some(format!("node limit {} reached", params.node_limit));
            pending = Some(node);
            break;
        }
        if let Some(t) = params.time_limit {
            if started.elapsed().as_secs_f64() > t {
                limit_hit = Some(format!("time limit {t}s reached"));
                pending = Some(node);
                break;
            }
        }
        nodes += 1;

        for (k, &j) in binaries.iter().enumerate() {
            s.set_bounds(j, root_bounds[k].0, root_bounds[k].1);
        }
        for &(j, v) in &node.fixings {
            s.set_bounds(j, v, v);
        }
        s.place_nonbasics();
        s.recompute_basics();
        let mut outcome = s.solve(cap);
        if outcome == LpOutcome::IterationLimit {
            s.refactor();
            s.place_nonbasics();
            s.recompute_basics();
            outcome = s.primal_simplex(cap);
        }
        match outcome {
            LpOutcome::Optimal => {}
            LpOutcome::Infeasible => continue,
            LpOutcome::Unbounded => {
                if node.depth == 0 {
                    let mut r = SolveResult::without_solution(Status::Unbounded, None);
                    r.nodes = nodes;
                    r.iterations = s.iterations;
                    r.seconds = started.elapsed().as_secs_f64();
                    return r;
                }
                continue;
            }
            LpOutcome::IterationLimit => {
                numeric_trouble = true;
                pruned_bound = pruned_bound.min(node.bound);
                continue;
            }
        }
        let z = s.objective();
        if let Some((k, up, dist)) = node.branched {
            if node.bound.is_finite() {
                costs.record(k, up, (z - node.bound).max(0.0) / dist);
            }
        }
        if let Some((inc, _)) = &incumbent {
            if z >= *inc - tolerance(*inc) {
                pruned_bound = pruned_bound.min(z.max(node.bound));
                continue;
            }
        }
        let x = s.values();
        // A binary whose move off its bound would already exceed the
        // incumbent stays put in the whole subtree.
        let mut fixings = node.fixings.clone();
        if let Some((inc, _)) = &incumbent {
            let cutoff = *inc - tolerance(*inc);
            for &j in &binaries {
                if s.lp.lower[j] >= s.lp.upper[j] {
                    continue;
                }
                let Some(d) = s.nonbasic_reduced_cost(j) else { continue };
                if x[j] <= s.lp.lower[j] && z + d >= cutoff {
                    fixings.push((j, s.lp.lower[j]));
                } else if x[j] >= s.lp.upper[j] && z - d >= cutoff {
                    fixings.push((j, s.lp.upper[j]));
                }
            }
        }
        // Product of estimated degradations, most fractional on ties, then
        // lowest index.
        let mut branch: Option<(usize, usize, f64)> = None;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for (k, &j) in binaries.iter().enumerate() {
            let frac = (x[j] - x[j].round()).abs();
            if frac <= INT_TOL {
                continue;
            }
            let down = x[j] - x[j].floor();
            let up = 1.0 - down;
            let score = (costs.estimate(k, false) * down).max(1e-6) * (costs.estimate(k, true) * up).max(1e-6);
            let key = (score, frac);
            if key.0 > best.0 * (1.0 + 1e-9) + 1e-12 || (key.0 >= best.0 * (1.0 - 1e-9) && key.1 > best.1 + 1e-12) {
                best = key;
                branch = Some((k, j, x[j]));
            }
        }
        match branch {
            None => {
                let mut sol = x;
                for &j in &binaries {
                    sol[j] = sol[j].round();
                }
                let val = sign * model.objective_value(&sol);
                if incumbent.as_ref().is_none_or(|(inc, _)| val < *inc) {
                    incumbent = Some((val, sol));
                }
                frontier.to_best();
            }
            Some((k, j, v)) => {
                let bound = z.max(node.bound);
                let down = v - v.floor();
                let mut child = |value: f64| {
                    let mut fixings = fixings.clone();
                    fixings.push((j, value));
                    next_id += 1;
                    let up = value > 0.5;
                    let dist = if up { 1.0 - down } else { down };
                    Node { id: next_id - 1, depth: node.depth + 1, bound, fixings, branched: Some((k, up, dist)) }
                };
                // The up branch goes first: it reaches integral points in
                // few levels when most binaries sit near zero.
                let (first, second) = (child(1.0), child(0.0));
                match &mut frontier {
                    Frontier::Dive(stack) => {
                        stack.push(second);
                        pending = Some(first);
                    }
                    Frontier::Best(heap) => {
                        // Stay in this subtree while it is close to the best
                        // open bound: the tableau is already near its optimum.
                        let inc = incumbent.as_ref().map_or(f64::INFINITY, |(v, _)| *v);
                        let open = heap.peek().map_or(bound, |n| n.bound).min(bound);
                        heap.push(second);
                        if bound <= open + PLUNGE * (inc - open) {
                            pending = Some(first);
                        } else {
                            heap.push(first);
                        }
                    }
                }
            }
        }
    }

    let open_bound = pending.as_ref().map_or(f64::INFINITY, |n| n.bound).min(frontier.min_bound());
    let seconds = started.elapsed().as_secs_f64();
    let mut result = match incumbent {
        Some((inc, values)) => {
            let bound = inc.min(pruned_bound).min(open_bound);
            let closed = limit_hit.is_none() && !numeric_trouble;
            let status = if closed || inc - bound <= tolerance(inc) + 1e-9 {
                Status::Optimal
            } else {
                Status::FeasibleWithGap
            };
            SolveResult {
                status,
                objective: model.objective_value(&values),
                values,
                duals: None,
                reduced_costs: None,
                bound: sign * bound,
                nodes,
                iterations: 0,
                seconds,
                message: limit_hit.clone(),
            }
        }
        None if limit_hit.is_some() || numeric_trouble => SolveResult::without_solution(
            Status::LimitReached,
            limit_hit.clone().or(Some("simplex failed to converge on some nodes".into())),
        ),
        None => SolveResult::without_solution(Status::Infeasible, None),
    };
    result.nodes = nodes;
    result.iterations = s.iterations;
    result.seconds = seconds;
    result
}
