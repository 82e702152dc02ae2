use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Multiplier turning the objective into a minimization.
    pub(crate) fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cmp {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RowId(pub usize);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    /// Symbolic tag such as `x_3` or `lambda0`.
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
    pub obj: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }
}

/// A linear or mixed-binary program.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub name: String,
    pub sense: Sense,
    pub vars: Vec<Variable>,
    pub rows: Vec<Constraint>,
}

impl Model {
    pub fn new(name: impl Into<String>, sense: Sense) -> Model {
        Model { name: name.into(), sense, vars: Vec::new(), rows: Vec::new() }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        kind: VarKind,
        obj: f64,
    ) -> VarId {
        self.vars.push(Variable { name: name.into(), lower, upper, kind, obj });
        VarId(self.vars.len() - 1)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, obj: f64) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous, obj)
    }

    pub fn binary(&mut self, name: impl Into<String>, obj: f64) -> VarId {
        self.add_var(name, 0.0, 1.0, VarKind::Binary, obj)
    }

    /// Add `sum(coef * var) cmp rhs`. Repeated variables are merged and
    /// zero coefficients dropped.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> RowId {
        let mut merged: Vec<(usize, f64)> = terms.into_iter().map(|(v, a)| (v.0, a)).collect();
        merged.sort_by_key(|&(j, _)| j);
        let mut terms: Vec<(usize, f64)> = Vec::with_capacity(merged.len());
        for (j, a) in merged {
            match terms.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => terms.push((j, a)),
            }
        }
        terms.retain(|&(_, a)| a != 0.0);
        self.rows.push(Constraint { name: name.into(), terms, cmp, rhs });
        RowId(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarKind::Binary).count()
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.vars.iter().zip(values).map(|(v, x)| v.obj * x).sum()
    }

    /// Same model with every binary relaxed to a continuous `[0, 1]` variable.
    pub fn relaxed(&self) -> Model {
        let mut m = self.clone();
        for v in &mut m.vars {
            if v.kind == VarKind::Binary {
                v.kind = VarKind::Continuous;
                v.lower = v.lower.max(0.0);
                v.upper = v.upper.min(1.0);
            }
        }
        m
    }

    /// Structural sanity: finite coefficients, index range, binary bounds.
    pub fn validate(&self) -> crate::Result<()> {
        let bad = |msg: String| Err(crate::Error::Parameter(msg));
        for v in &self.vars {
            if !v.obj.is_finite() || v.lower.is_nan() || v.upper.is_nan() {
                return bad(format!("variable {} has non-finite data", v.name));
            }
            if v.lower > v.upper {
                return bad(format!("variable {} has empty bounds", v.name));
            }
            if v.kind == VarKind::Binary && (v.lower < 0.0 || v.upper > 1.0) {
                return bad(format!("binary {} has bounds outside [0, 1]", v.name));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return bad(format!("row {} has non-finite rhs", r.name));
            }
            for &(j, a) in &r.terms {
                if j >= self.vars.len() || !a.is_finite() {
                    return bad(format!("row {} has an invalid term", r.name));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    /// A feasible incumbent exists but the bound gap exceeds the tolerance.
    FeasibleWithGap,
    Infeasible,
    Unbounded,
    /// A limit was hit before any feasible point was found, or numerics failed.
    LimitReached,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: Status,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Shadow prices `d objective / d rhs` per row (pure LP solves only).
    pub duals: Option<Vec<f64>>,
    /// Reduced costs per variable (pure LP solves only).
    pub reduced_costs: Option<Vec<f64>>,
    /// Proven bound on the optimum: upper for maximization, lower for minimization.
    pub bound: f64,
    pub nodes: usize,
    pub iterations: usize,
    pub seconds: f64,
    pub message: Option<String>,
}

impl SolveResult {
    pub(crate) fn without_solution(status: Status, message: impl Into<Option<String>>) -> SolveResult {
        SolveResult {
            status,
            objective: f64::NAN,
            values: Vec::new(),
            duals: None,
            reduced_costs: None,
            bound: f64::NAN,
            nodes: 0,
            iterations: 0,
            seconds: 0.0,
            message: message.into(),
        }
    }

    pub fn has_solution(&self) -> bool {
        matches!(self.status, Status::Optimal | Status::FeasibleWithGap)
    }

    /// Dual objective `sum(rhs * dual) + sum(bound * reduced cost)`.
    pub fn dual_objective(&self, model: &Model) -> Option<f64> {
        let duals = self.duals.as_ref()?;
        let rc = self.reduced_costs.as_ref()?;
        let rows: f64 = model.rows.iter().zip(duals).map(|(r, y)| r.rhs * y).sum();
        let bounds: f64 = model
            .vars
            .iter()
            .zip(rc.iter().zip(&self.values))
            .map(|(v, (&d, &x))| {
                if d == 0.0 {
                    0.0
                } else if (x - v.lower).abs() <= (x - v.upper).abs() {
                    d * v.lower
                } else {
                    d * v.upper
                }
            })
            .sum();
        Some(rows + bounds)
    }
}

/// Branch-and-bound controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpParams {
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub node_limit: usize,
    pub time_limit: Option<f64>,
}

impl Default for MilpParams {
    fn default() -> Self {
        MilpParams { abs_gap: 1e-6, rel_gap: 1e-9, node_limit: 1_000_000, time_limit: None }
    }
}

impl MilpParams {
    /// Params for objectives known to take integer values at every
    /// integral solution: any node that cannot gain a full unit is pruned.
    pub fn integral_objective() -> MilpParams {
        MilpParams { abs_gap: 1.0 - 1e-6, ..MilpParams::default() }
    }
}
