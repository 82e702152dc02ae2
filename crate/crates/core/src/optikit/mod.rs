//! Linear and mixed-binary programming.
//!
//! Models are built with [`Model`], solved by the built-in dense simplex
//! ([`solve_lp`]) and branch-and-bound ([`solve_milp`]), or handed to an
//! external solver through a [`Backend`].

mod backend;
mod branch;
mod check;
mod lpformat;
mod model;
mod simplex;

pub use backend::{external_backend, solve, Backend, Reference, Registry, Scipy, SOLVER_ENV};
pub use branch::{solve_lp, solve_milp, solve_milp_with_start};
pub use check::{check_solution, Violation};
pub use lpformat::{read_lp, write_lp};
pub use model::{
    Cmp, Constraint, MilpParams, Model, RowId, Sense, SolveResult, Status, VarId, VarKind, Variable,
};

#[cfg(test)]
mod tests;
