use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::Instant;

use serde::Deserialize;
use serde_json::json;

use super::model::{Cmp, MilpParams, Model, Sense, SolveResult, Status, VarKind};
use crate::{Error, Result};

/// Environment variable naming the backend used by [`Registry::from_env`].
pub const SOLVER_ENV: &str = "INFBLOCK_SOLVER";

pub trait Backend: Send + Sync {
    fn name(&self) -> &str;
    fn solve_lp(&self, model: &Model) -> Result<SolveResult>;
    fn solve_milp(&self, model: &Model, params: &MilpParams) -> Result<SolveResult>;
}

/// The built-in simplex and branch-and-bound.
#[derive(Clone, Copy, Debug, Default)]
pub struct Reference;

impl Backend for Reference {
    fn name(&self) -> &str {
        "reference"
    }

    fn solve_lp(&self, model: &Model) -> Result<SolveResult> {
        Ok(super::solve_lp(&model.relaxed()))
    }

    fn solve_milp(&self, model: &Model, params: &MilpParams) -> Result<SolveResult> {
        Ok(super::solve_milp(model, params))
    }
}

/// Runs `scipy.optimize.milp` (HiGHS) in a python subprocess.
#[derive(Clone, Debug)]
pub struct Scipy {
    pub python: String,
}

impl Default for Scipy {
    fn default() -> Self {
        Scipy { python: "python3".into() }
    }
}

const SCIPY_DRIVER: &str = r#"
import json, sys
import numpy as np
from scipy.optimize import milp, LinearConstraint, Bounds
from scipy.sparse import coo_matrix
p = json.load(sys.stdin)
n = len(p["c"])
c = np.array(p["c"], dtype=float)
if p["maximize"]:
    c = -c
cons = []
if p["rows"]:
    r, k, v = zip(*p["entries"]) if p["entries"] else ((), (), ())
    A = coo_matrix((v, (r, k)), shape=(p["rows"], n)).tocsr()
    cons.append(LinearConstraint(A, np.array(p["rlo"], dtype=float), np.array(p["rhi"], dtype=float)))
opts = {"mip_rel_gap": p["rel_gap"]}
if p["time_limit"] is not None:
    opts["time_limit"] = p["time_limit"]
res = milp(c, constraints=cons, integrality=np.array(p["integrality"]),
           bounds=Bounds(np.array(p["lb"], dtype=float), np.array(p["ub"], dtype=float)), options=opts)
out = {"status": int(res.status), "message": str(res.message)}
if res.x is not None:
    out["x"] = [float(t) for t in res.x]
    out["fun"] = float(res.fun) * (-1.0 if p["maximize"] else 1.0)
bound = getattr(res, "mip_dual_bound", None)
if bound is not None and np.isfinite(bound):
    out["bound"] = float(bound) * (-1.0 if p["maximize"] else 1.0)
json.dump(out, sys.stdout)
"#;

#[derive(Deserialize)]
struct ScipyReply {
    status: i64,
    message: String,
    x: Option<Vec<f64>>,
    fun: Option<f64>,
    bound: Option<f64>,
}

fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else if v > 0.0 {
        json!(1e300)
    } else {
        json!(-1e300)
    }
}

impl Scipy {
    fn run(&self, model: &Model, integral: bool, params: &MilpParams) -> Result<SolveResult> {
        model.validate()?;
        let started = Instant::now();
        let entries: Vec<(usize, usize, f64)> = model
            .rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.terms.iter().map(move |&(j, a)| (i, j, a)))
            .collect();
        let (rlo, rhi): (Vec<_>, Vec<_>) = model
            .rows
            .iter()
            .map(|r| match r.cmp {
                Cmp::Le => (finite_or_null(f64::NEG_INFINITY), json!(r.rhs)),
                Cmp::Ge => (json!(r.rhs), finite_or_null(f64::INFINITY)),
                Cmp::Eq => (json!(r.rhs), json!(r.rhs)),
            })
            .unzip();
        let payload = json!({
            "maximize": model.sense == Sense::Maximize,
            "c": model.vars.iter().map(|v| v.obj).collect::<Vec<_>>(),
            "lb": model.vars.iter().map(|v| finite_or_null(v.lower)).collect::<Vec<_>>(),
            "ub": model.vars.iter().map(|v| finite_or_null(v.upper)).collect::<Vec<_>>(),
            "integrality": model.vars.iter().map(|v| u8::from(integral && v.kind == VarKind::Binary)).collect::<Vec<_>>(),
            "rows": model.rows.len(),
            "entries": entries,
            "rlo": rlo,
            "rhi": rhi,
            "rel_gap": params.rel_gap,
            "time_limit": params.time_limit,
        });
        let mut child = Command::new(&self.python)
            .arg("-c")
            .arg(SCIPY_DRIVER)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Config(format!("cannot start {}: {e}", self.python)))?;
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(payload.to_string().as_bytes())?;
        let output = child.wait_with_output()?;
        if !output.status.success() {
            let err = String::from_utf8_lossy(&output.stderr);
            if err.contains("ModuleNotFoundError") || err.contains("ImportError") {
                return Err(Error::Config(format!("scipy backend unavailable: {}", err.trim())));
            }
            return Err(Error::Solver(format!("scipy backend failed: {}", err.trim())));
        }
        let reply: ScipyReply = serde_json::from_slice(&output.stdout)?;
        let status = match reply.status {
            0 => Status::Optimal,
            2 => Status::Infeasible,
            3 => Status::Unbounded,
            _ if reply.x.is_some() => Status::FeasibleWithGap,
            _ => Status::LimitReached,
        };
        let mut res = match (reply.x, reply.fun) {
            (Some(values), Some(objective)) if status != Status::Infeasible => SolveResult {
                status,
                objective,
                values,
                duals: None,
                reduced_costs: None,
                bound: reply.bound.unwrap_or(objective),
                nodes: 0,
                iterations: 0,
                seconds: 0.0,
                message: Some(reply.message),
            },
            _ => SolveResult::without_solution(status, Some(reply.message)),
        };
        res.seconds = started.elapsed().as_secs_f64();
        Ok(res)
    }
}

impl Backend for Scipy {
    fn name(&self) -> &str {
        "scipy"
    }

    fn solve_lp(&self, model: &Model) -> Result<SolveResult> {
        self.run(model, false, &MilpParams::default())
    }

    fn solve_milp(&self, model: &Model, params: &MilpParams) -> Result<SolveResult> {
        self.run(model, true, params)
    }
}

/// Backends by name. `reference` is always present.
#[derive(Clone)]
pub struct Registry {
    backends: BTreeMap<String, Arc<dyn Backend>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Registry { backends: BTreeMap::new() };
        r.register(Arc::new(Reference));
        r.register(Arc::new(Scipy::default()));
        r
    }
}

impl Registry {
    pub fn register(&mut self, backend: Arc<dyn Backend>) {
        self.backends.insert(backend.name().to_string(), backend);
    }

    pub fn names(&self) -> Vec<&str> {
        self.backends.keys().map(String::as_str).collect()
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Backend>> {
        self.backends.get(name).cloned().ok_or_else(|| {
            Error::Config(format!("unknown solver backend {name:?} (known: {})", self.names().join(", ")))
        })
    }

    /// The backend named by `INFBLOCK_SOLVER`, or `reference`.
    pub fn from_env(&self) -> Result<Arc<dyn Backend>> {
        match std::env::var(SOLVER_ENV) {
            Ok(name) if !name.is_empty() => self.get(&name),
            _ => self.get("reference"),
        }
    }
}

/// Solve with a backend looked up by name in the default registry.
pub fn external_backend(name: &str, model: &Model, params: &MilpParams) -> Result<SolveResult> {
    let backend = Registry::default().get(name)?;
    if model.num_binaries() == 0 {
        backend.solve_lp(model)
    } else {
        backend.solve_milp(model, params)
    }
}

/// Solve with the backend selected by `INFBLOCK_SOLVER` (the reference
/// solver by default). `start` seeds the reference branch-and-bound with a
/// feasible point; external backends ignore it.
pub fn solve(model: &Model, params: &MilpParams, start: Option<&[f64]>) -> Result<SolveResult> {
    let backend = Registry::default().from_env()?;
    if backend.name() == "reference" {
        return Ok(match model.num_binaries() {
            0 => super::solve_lp(model),
            _ => super::solve_milp_with_start(model, params, start),
        });
    }
    if model.num_binaries() == 0 {
        backend.solve_lp(model)
    } else {
        backend.solve_milp(model, params)
    }
}
