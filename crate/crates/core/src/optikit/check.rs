use serde::{Deserialize, Serialize};

use super::model::{Cmp, Model, VarKind};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Row activity misses its right-hand side by `amount`.
    Row { row: usize, name: String, amount: f64 },
    Bound { var: usize, name: String, amount: f64 },
    /// Distance of a binary from the nearest integer.
    Integrality { var: usize, name: String, amount: f64 },
}

impl Violation {
    pub fn amount(&self) -> f64 {
        match self {
            Violation::Row { amount, .. }
            | Violation::Bound { amount, .. }
            | Violation::Integrality { amount, .. } => *amount,
        }
    }
}

/// Every constraint, bound and integrality violation of `values` larger
/// than `tol`. An empty report means the point is feasible.
pub fn check_solution(model: &Model, values: &[f64], tol: f64) -> Result<Vec<Violation>> {
    if values.len() != model.num_vars() {
        return Err(Error::Dimension { expected: model.num_vars(), actual: values.len() });
    }
    let mut out = Vec::new();
    for (j, (v, &x)) in model.vars.iter().zip(values).enumerate() {
        let excess = (v.lower - x).max(x - v.upper).max(0.0);
        if excess > tol || x.is_nan() {
            out.push(Violation::Bound { var: j, name: v.name.clone(), amount: excess });
        }
        if v.kind == VarKind::Binary {
            let frac = (x - x.round()).abs();
            if frac > tol {
                out.push(Violation::Integrality { var: j, name: v.name.clone(), amount: frac });
            }
        }
    }
    for (i, r) in model.rows.iter().enumerate() {
        let act = r.activity(values);
        let miss = match r.cmp {
            Cmp::Le => act - r.rhs,
            Cmp::Ge => r.rhs - act,
            Cmp::Eq => (act - r.rhs).abs(),
        };
        if miss > tol || act.is_nan() {
            out.push(Violation::Row { row: i, name: r.name.clone(), amount: miss });
        }
    }
    Ok(out)
}
