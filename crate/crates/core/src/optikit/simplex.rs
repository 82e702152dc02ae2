//! Dense-tableau bounded-variable simplex.
//!
//! Every row `a_r x (cmp) b_r` is stored as `a_r x - s_r = 0` with the
//! comparison moved into the bounds of the logical variable `s_r`. The
//! tableau keeps each basic variable as a combination of the nonbasic ones,
//! `x_B(r) + sum_j T[r][j] x_j = 0`, so changing bounds never invalidates
//! it: branch-and-bound reuses one tableau for every node and re-optimizes
//! with the dual simplex.

use super::model::{Cmp, Model, VarKind};

pub(crate) const PIVOT_TOL: f64 = 1e-9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const DROP_TOL: f64 = 1e-13;
/// Non-improving iterations tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 60;
const NONBASIC: usize = usize::MAX;

/// A model translated to internal minimization form.
#[derive(Clone, Debug)]
pub(crate) struct LpData {
    pub ncols: usize,
    pub nrows: usize,
    pub rows: Vec<Vec<(usize, f64)>>,
    /// Minimization costs of structural columns.
    pub cost: Vec<f64>,
    /// Bounds of structural then logical variables.
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub sign: f64,
}

impl LpData {
    pub fn from_model(model: &Model) -> LpData {
        let ncols = model.vars.len();
        let nrows = model.rows.len();
        let sign = model.sense.sign();
        let mut lower = Vec::with_capacity(ncols + nrows);
        let mut upper = Vec::with_capacity(ncols + nrows);
        for v in &model.vars {
            match v.kind {
                VarKind::Binary => {
                    lower.push(v.lower.max(0.0));
                    upper.push(v.upper.min(1.0));
                }
                VarKind::Continuous => {
                    lower.push(v.lower);
                    upper.push(v.upper);
                }
            }
        }
        for r in &model.rows {
            let (lo, hi) = match r.cmp {
                Cmp::Le => (f64::NEG_INFINITY, r.rhs),
                Cmp::Ge => (r.rhs, f64::INFINITY),
                Cmp::Eq => (r.rhs, r.rhs),
            };
            lower.push(lo);
            upper.push(hi);
        }
        LpData {
            ncols,
            nrows,
            rows: model.rows.iter().map(|r| r.terms.clone()).collect(),
            cost: model.vars.iter().map(|v| sign * v.obj).collect(),
            lower,
            upper,
            sign,
        }
    }

    pub fn width(&self) -> usize {
        self.ncols + self.nrows
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum LpOutcome {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

pub(crate) struct Simplex {
    pub lp: LpData,
    width: usize,
    /// Row-major `nrows x width`.
    t: Vec<f64>,
    /// Reduced costs.
    d: Vec<f64>,
    basis: Vec<usize>,
    row_of: Vec<usize>,
    pub x: Vec<f64>,
    pub iterations: usize,
    pivots_since_refactor: usize,
    refactor_every: usize,
    bland: bool,
    scratch: Vec<usize>,
}

fn clamp_to_finite(lo: f64, hi: f64, prefer_upper: bool) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => {
            if prefer_upper {
                hi
            } else {
                lo
            }
        }
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

impl Simplex {
    /// Start from the all-logical basis.
    pub fn new(lp: LpData) -> Simplex {
        let (m, n) = (lp.nrows, lp.ncols);
        let width = lp.width();
        let mut t = vec![0.0; m * width];
        for (r, row) in lp.rows.iter().enumerate() {
            let base = r * width;
            for &(j, a) in row {
                t[base + j] -= a;
            }
            t[base + n + r] = 1.0;
        }
        let mut d = vec![0.0; width];
        d[..n].copy_from_slice(&lp.cost);
        let basis: Vec<usize> = (n..width).collect();
        let mut row_of = vec![NONBASIC; width];
        for (r, &b) in basis.iter().enumerate() {
            row_of[b] = r;
        }
        let refactor_every = 400.max(m);
        let mut s = Simplex {
            lp,
            width,
            t,
            d,
            basis,
            row_of,
            x: vec![0.0; width],
            iterations: 0,
            pivots_since_refactor: 0,
            refactor_every,
            bland: false,
            scratch: Vec::new(),
        };
        s.place_nonbasics();
        s.recompute_basics();
        s
    }

    #[inline]
    fn row(&self, r: usize) -> &[f64] {
        &self.t[r * self.width..(r + 1) * self.width]
    }

    /// Put every nonbasic variable on the bound its reduced cost prefers.
    pub fn place_nonbasics(&mut self) {
        for j in 0..self.width {
            if self.row_of[j] != NONBASIC {
                continue;
            }
            let (lo, hi) = (self.lp.lower[j], self.lp.upper[j]);
            self.x[j] = clamp_to_finite(lo, hi, self.d[j] < 0.0);
        }
    }

    pub fn recompute_basics(&mut self) {
        let nonzero: Vec<(usize, f64)> = (0..self.width)
            .filter(|&j| self.row_of[j] == NONBASIC && self.x[j] != 0.0)
            .map(|j| (j, self.x[j]))
            .collect();
        for r in 0..self.lp.nrows {
            let row = self.row(r);
            let v: f64 = nonzero.iter().map(|&(j, xj)| row[j] * xj).sum();
            let b = self.basis[r];
            self.x[b] = -v;
        }
    }

    pub fn objective(&self) -> f64 {
        self.lp.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let x = self.x[j];
        let (lo, hi) = (self.lp.lower[j], self.lp.upper[j]);
        if x < lo - PRIMAL_TOL * (1.0 + lo.abs()) {
            lo - x
        } else if x > hi + PRIMAL_TOL * (1.0 + hi.abs()) {
            x - hi
        } else {
            0.0
        }
    }

    fn primal_feasible(&self) -> bool {
        self.basis.iter().all(|&b| self.infeasibility(b) == 0.0)
    }

    fn at_lower(&self, j: usize) -> bool {
        self.x[j] == self.lp.lower[j]
    }

    fn at_upper(&self, j: usize) -> bool {
        self.x[j] == self.lp.upper[j]
    }

    fn dual_feasible(&self) -> bool {
        (0..self.width).all(|j| {
            if self.row_of[j] != NONBASIC || self.lp.lower[j] == self.lp.upper[j] {
                return true;
            }
            let d = self.d[j];
            let can_up = !self.at_upper(j);
            let can_down = !self.at_lower(j);
            !(can_up && d < -DUAL_TOL) && !(can_down && d > DUAL_TOL)
        })
    }

    /// Max `|a_r x - s_r|` against the original rows.
    pub fn residual(&self) -> f64 {
        let n = self.lp.ncols;
        self.lp
            .rows
            .iter()
            .enumerate()
            .map(|(r, row)| {
                let act: f64 = row.iter().map(|&(j, a)| a * self.x[j]).sum();
                (act - self.x[n + r]).abs() / (1.0 + act.abs())
            })
            .fold(0.0, f64::max)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let m = self.lp.nrows;
        let piv = self.t[r * w + q];
        let inv = 1.0 / piv;
        {
            let prow = &mut self.t[r * w..(r + 1) * w];
            for v in prow.iter_mut() {
                *v *= inv;
            }
            prow[q] = 1.0;
        }
        self.scratch.clear();
        for j in 0..w {
            let v = self.t[r * w + j];
            if v.abs() > DROP_TOL {
                self.scratch.push(j);
            } else {
                self.t[r * w + j] = 0.0;
            }
        }
        let (before, rest) = self.t.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let nz = &self.scratch;
        let eliminate = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                for &j in nz {
                    let v = row[j] - f * prow[j];
                    row[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
                }
                row[q] = 0.0;
            }
        };
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            eliminate(row);
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in nz {
                self.d[j] -= f * prow[j];
            }
            self.d[q] = 0.0;
        }
        let old = self.basis[r];
        self.row_of[old] = NONBASIC;
        self.basis[r] = q;
        self.row_of[q] = r;
        self.d[old] = -f * prow[old];
        debug_assert!(m == self.basis.len());
        self.iterations += 1;
        self.pivots_since_refactor += 1;
    }

    /// Rebuild the tableau from the original rows for the current basis.
    /// Singular bases are repaired by swapping in logical variables.
    pub fn refactor(&mut self) {
        let (m, n, w) = (self.lp.nrows, self.lp.ncols, self.width);
        let mut t = vec![0.0; m * w];
        for (r, row) in self.lp.rows.iter().enumerate() {
            for &(j, a) in row {
                t[r * w + j] -= a;
            }
            t[r * w + n + r] = 1.0;
        }
        let mut assigned = vec![false; m];
        let mut new_basis = vec![NONBASIC; m];
        let wanted: Vec<usize> = self.basis.clone();
        let gauss = |t: &mut Vec<f64>, r: usize, c: usize| {
            let inv = 1.0 / t[r * w + c];
            for j in 0..w {
                t[r * w + j] *= inv;
            }
            let prow: Vec<f64> = t[r * w..(r + 1) * w].to_vec();
            let nz: Vec<usize> = (0..w).filter(|&j| prow[j] != 0.0).collect();
            for i in 0..m {
                if i == r {
                    continue;
                }
                let f = t[i * w + c];
                if f != 0.0 {
                    for &j in &nz {
                        t[i * w + j] -= f * prow[j];
                    }
                    t[i * w + c] = 0.0;
                }
            }
        };
        let mut dropped = Vec::new();
        for &c in &wanted {
            let best = (0..m)
                .filter(|&i| !assigned[i])
                .max_by(|&a, &b| t[a * w + c].abs().total_cmp(&t[b * w + c].abs()).then(b.cmp(&a)));
            match best {
                Some(r) if t[r * w + c].abs() > 1e-11 => {
                    gauss(&mut t, r, c);
                    assigned[r] = true;
                    new_basis[r] = c;
                }
                _ => dropped.push(c),
            }
        }
        let mut in_basis = vec![false; w];
        for &b in new_basis.iter().filter(|&&b| b != NONBASIC) {
            in_basis[b] = true;
        }
        for r in 0..m {
            if assigned[r] {
                continue;
            }
            // Prefer logical columns when repairing.
            let c = (n..w)
                .chain(0..n)
                .filter(|&j| !in_basis[j])
                .max_by(|&a, &b| t[r * w + a].abs().total_cmp(&t[r * w + b].abs()))
                .expect("full row rank");
            gauss(&mut t, r, c);
            assigned[r] = true;
            new_basis[r] = c;
            in_basis[c] = true;
        }
        self.t = t;
        self.basis = new_basis;
        self.row_of.iter_mut().for_each(|r| *r = NONBASIC);
        for (r, &b) in self.basis.iter().enumerate() {
            self.row_of[b] = r;
        }
        for c in dropped {
            let (lo, hi) = (self.lp.lower[c], self.lp.upper[c]);
            let x = self.x[c];
            self.x[c] = if (x - lo).abs() <= (x - hi).abs() { clamp_to_finite(lo, hi, false) } else { clamp_to_finite(lo, hi, true) };
        }
        self.recompute_reduced_costs();
        self.recompute_basics();
        self.pivots_since_refactor = 0;
    }

    fn recompute_reduced_costs(&mut self) {
        let n = self.lp.ncols;
        let mut d = vec![0.0; self.width];
        d[..n].copy_from_slice(&self.lp.cost);
        for r in 0..self.lp.nrows {
            let cb = if self.basis[r] < n { self.lp.cost[self.basis[r]] } else { 0.0 };
            if cb != 0.0 {
                let row = self.row(r);
                for j in 0..self.width {
                    d[j] -= cb * row[j];
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.d = d;
    }

    fn maybe_refactor(&mut self) {
        if self.pivots_since_refactor >= self.refactor_every {
            self.refactor();
        }
    }

    /// Optimize from the current basis, choosing primal or dual simplex.
    pub fn solve(&mut self, max_iter: usize) -> LpOutcome {
        for _attempt in 0..3 {
            let outcome = if self.dual_feasible() {
                self.dual_simplex(max_iter)
            } else {
                self.primal_simplex(max_iter)
            };
            match outcome {
                LpOutcome::Optimal => {
                    if self.residual() > 1e-7 || !self.dual_feasible() {
                        self.refactor();
                        if !self.primal_feasible() || !self.dual_feasible() {
                            continue;
                        }
                    }
                    return LpOutcome::Optimal;
                }
                LpOutcome::Infeasible | LpOutcome::Unbounded => {
                    if self.residual() > 1e-7 {
                        self.refactor();
                        continue;
                    }
                    return outcome;
                }
                LpOutcome::IterationLimit => return outcome,
            }
        }
        LpOutcome::IterationLimit
    }

    /// Dual simplex; requires a dual feasible basis.
    pub fn dual_simplex(&mut self, max_iter: usize) -> LpOutcome {
        let start = self.iterations;
        let mut best_obj = f64::NEG_INFINITY;
        let mut stall = 0;
        self.bland = false;
        loop {
            if self.iterations - start >= max_iter {
                return LpOutcome::IterationLimit;
            }
            self.maybe_refactor();
            // Leaving row.
            let mut leave = None;
            let mut worst = 0.0;
            for r in 0..self.lp.nrows {
                let inf = self.infeasibility(self.basis[r]);
                if inf > 0.0 {
                    if self.bland {
                        if leave.is_none_or(|l: usize| self.basis[r] < self.basis[l]) {
                            leave = Some(r);
                        }
                    } else if inf > worst {
                        worst = inf;
                        leave = Some(r);
                    }
                }
            }
            let Some(r) = leave else {
                return LpOutcome::Optimal;
            };
            let b = self.basis[r];
            let increase = self.x[b] < self.lp.lower[b];
            let target = if increase { self.lp.lower[b] } else { self.lp.upper[b] };
            let dir = if increase { 1.0 } else { -1.0 };
            // Entering column: ratio test over eligible nonbasics (Harris two-pass).
            let row = self.row(r);
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for j in 0..self.width {
                if self.row_of[j] != NONBASIC {
                    continue;
                }
                let alpha = row[j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let (lo, hi) = (self.lp.lower[j], self.lp.upper[j]);
                if lo == hi {
                    continue;
                }
                let free = !lo.is_finite() && !hi.is_finite();
                let ok = if free {
                    true
                } else if self.x[j] == lo {
                    alpha * dir < 0.0
                } else {
                    alpha * dir > 0.0
                };
                if ok {
                    cands.push((j, alpha, self.d[j].abs()));
                }
            }
            if cands.is_empty() {
                return LpOutcome::Infeasible;
            }
            let q = if self.bland {
                let min = cands.iter().map(|&(_, a, dj)| dj / a.abs()).fold(f64::INFINITY, f64::min);
                cands
                    .iter()
                    .filter(|&&(_, a, dj)| dj / a.abs() <= min + 1e-12)
                    .map(|&(j, _, _)| j)
                    .min()
                    .unwrap()
            } else {
                let bound = cands
                    .iter()
                    .map(|&(_, a, dj)| (dj + DUAL_TOL) / a.abs())
                    .fold(f64::INFINITY, f64::min);
                cands
                    .iter()
                    .filter(|&&(_, a, dj)| dj / a.abs() <= bound)
                    .max_by(|x, y| x.1.abs().total_cmp(&y.1.abs()).then(y.0.cmp(&x.0)))
                    .map(|&(j, _, _)| j)
                    .unwrap()
            };
            let alpha_q = self.t[r * self.width + q];
            let delta_b = target - self.x[b];
            let delta_q = -delta_b / alpha_q;
            self.x[q] += delta_q;
            for i in 0..self.lp.nrows {
                if i != r {
                    let a = self.t[i * self.width + q];
                    if a != 0.0 {
                        let bi = self.basis[i];
                        self.x[bi] -= a * delta_q;
                    }
                }
            }
            self.x[b] = target;
            self.pivot(r, q);
            if !self.bland {
                let obj = self.objective();
                if obj > best_obj + 1e-12 * (1.0 + obj.abs()) {
                    best_obj = obj;
                    stall = 0;
                } else {
                    stall += 1;
                    if stall > STALL_LIMIT {
                        self.bland = true;
                    }
                }
            }
        }
    }

    /// Composite primal simplex: minimize the sum of infeasibilities, then
    /// the objective.
    pub fn primal_simplex(&mut self, max_iter: usize) -> LpOutcome {
        let start = self.iterations;
        let m = self.lp.nrows;
        let mut best = f64::INFINITY;
        let mut stall = 0;
        let mut last_phase_one = true;
        self.bland = false;
        loop {
            if self.iterations - start >= max_iter {
                return LpOutcome::IterationLimit;
            }
            self.maybe_refactor();
            let mut phase_one = false;
            let mut cost1 = vec![0.0; m];
            let mut total_inf = 0.0;
            for (r, c) in cost1.iter_mut().enumerate() {
                let b = self.basis[r];
                let inf = self.infeasibility(b);
                if inf > 0.0 {
                    phase_one = true;
                    total_inf += inf;
                    *c = if self.x[b] < self.lp.lower[b] { -1.0 } else { 1.0 };
                }
            }
            if phase_one != last_phase_one {
                best = f64::INFINITY;
                stall = 0;
                self.bland = false;
                last_phase_one = phase_one;
            }
            let price = |s: &Simplex, j: usize| -> f64 {
                if phase_one {
                    let mut v = 0.0;
                    for (r, &c) in cost1.iter().enumerate() {
                        if c != 0.0 {
                            v -= c * s.t[r * s.width + j];
                        }
                    }
                    v
                } else {
                    s.d[j]
                }
            };
            // Entering variable.
            let mut enter: Option<(usize, f64)> = None;
            let mut best_score = 0.0;
            for j in 0..self.width {
                if self.row_of[j] != NONBASIC || self.lp.lower[j] == self.lp.upper[j] {
                    continue;
                }
                let dj = price(self, j);
                let dirn = if dj < -DUAL_TOL && self.x[j] < self.lp.upper[j] {
                    1.0
                } else if dj > DUAL_TOL && self.x[j] > self.lp.lower[j] {
                    -1.0
                } else {
                    continue;
                };
                if self.bland {
                    enter = Some((j, dirn));
                    break;
                }
                if dj.abs() > best_score {
                    best_score = dj.abs();
                    enter = Some((j, dirn));
                }
            }
            let Some((q, dirn)) = enter else {
                return if phase_one { LpOutcome::Infeasible } else { LpOutcome::Optimal };
            };
            // Ratio test.
            let span = self.lp.upper[q] - self.lp.lower[q];
            let mut theta = if span.is_finite() { span } else { f64::INFINITY };
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_alpha = 0.0;
            for i in 0..m {
                let alpha = self.t[i * self.width + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -alpha * dirn;
                let b = self.basis[i];
                let (lo, hi, x) = (self.lp.lower[b], self.lp.upper[b], self.x[b]);
                let inf = self.infeasibility(b);
                let hit = if inf == 0.0 {
                    if rate > 0.0 && hi.is_finite() {
                        Some(((hi - x) / rate, hi))
                    } else if rate < 0.0 && lo.is_finite() {
                        Some(((lo - x) / rate, lo))
                    } else {
                        None
                    }
                } else if x < lo && rate > 0.0 {
                    Some(((lo - x) / rate, lo))
                } else if x > hi && rate < 0.0 {
                    Some(((hi - x) / rate, hi))
                } else {
                    None
                };
                if let Some((lim, at)) = hit {
                    let lim = lim.max(0.0);
                    let better = lim < theta - 1e-12
                        || (lim <= theta + 1e-12
                            && leave.is_some()
                            && if self.bland {
                                b < self.basis[leave.unwrap().0]
                            } else {
                                alpha.abs() > leave_alpha
                            });
                    if better || (leave.is_none() && lim <= theta) {
                        theta = lim;
                        leave = Some((i, at));
                        leave_alpha = alpha.abs();
                    }
                }
            }
            if theta.is_infinite() {
                return if phase_one { LpOutcome::Infeasible } else { LpOutcome::Unbounded };
            }
            self.x[q] += dirn * theta;
            for i in 0..m {
                let alpha = self.t[i * self.width + q];
                if alpha != 0.0 {
                    let b = self.basis[i];
                    self.x[b] += -alpha * dirn * theta;
                }
            }
            match leave {
                Some((r, at)) if !(span.is_finite() && theta >= span - 1e-12 && leave_alpha == 0.0) => {
                    let b = self.basis[r];
                    self.x[b] = at;
                    self.pivot(r, q);
                }
                _ => {
                    // Bound flip.
                    self.x[q] = if dirn > 0.0 { self.lp.upper[q] } else { self.lp.lower[q] };
                    self.iterations += 1;
                }
            }
            let progress = if phase_one { total_inf } else { self.objective() };
            if progress < best - 1e-12 * (1.0 + progress.abs()) {
                best = progress;
                stall = 0;
                self.bland = false;
            } else {
                stall += 1;
                if stall > STALL_LIMIT {
                    self.bland = true;
                }
            }
        }
    }

    /// Structural values.
    pub fn values(&self) -> Vec<f64> {
        self.x[..self.lp.ncols].to_vec()
    }

    /// Shadow prices in the model's own sense.
    pub fn duals(&self) -> Vec<f64> {
        let n = self.lp.ncols;
        (0..self.lp.nrows).map(|r| self.lp.sign * self.d[n + r]).collect()
    }

    pub fn reduced_costs(&self) -> Vec<f64> {
        (0..self.lp.ncols).map(|j| self.lp.sign * self.d[j]).collect()
    }

    /// Minimization-form reduced cost of `j` when it is nonbasic.
    pub fn nonbasic_reduced_cost(&self, j: usize) -> Option<f64> {
        (self.row_of[j] == NONBASIC).then(|| self.d[j])
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lp.lower[j] = lo;
        self.lp.upper[j] = hi;
    }
}
