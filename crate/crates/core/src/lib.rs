//! Computing node-blocking defenses against an adversary that runs influence
//! maximization on a social network.
//!
//! The crate is organized bottom-up:
//!
//! * [`netgraph`]: graphs, generators, sampling, loading, domination and centrality.
//! * [`diffusion`]: independent-cascade / linear-threshold diffusion and live-edge sampling.
//! * [`optikit`]: LP/MILP modeling plus a self-contained simplex and branch-and-bound solver.
//! * [`adversary`]: attacker best responses (domination MILP, greedy, CELF).
//! * [`blockade`]: defender solvers (dualized MILP, constraint generation, pruning, edge+node).
//! * [`baselines`]: heuristic comparison defenses.

pub mod adversary;
pub mod baselines;
pub mod blockade;
pub mod diffusion;
pub mod error;
pub mod netgraph;
pub mod optikit;
pub mod rng;

pub use error::{Error, Result};
pub use netgraph::{BlockSet, Graph, SeedSet};
