//! Experiment harness for the `infblock` command: graph generation and
//! sampling, single defense and attack runs, and the sweep tables.

pub mod app;
pub mod experiment;
pub mod graphs;
pub mod protocol;
pub mod tables;

pub use app::{run, Cli};
