//! Fixed workloads shared by the solver benchmarks.

use infblock_core::diffusion::{sample_live_edges, DiffusionModel, DiffusionSpec, LiveEdgeSampleSet};
use infblock_core::netgraph::{gen_ba, gen_er, gen_ws};
use infblock_core::Graph;

/// One graph per generator family at `n` nodes, with fixed seeds.
pub fn family(n: usize) -> Vec<(&'static str, Graph)> {
    vec![
        ("er", gen_er(n, 0.1, 1).expect("valid parameters")),
        ("ws", gen_ws(n, 5, 0.15, 2).expect("valid parameters")),
        ("ba", gen_ba(n, 3, 3).expect("valid parameters")),
    ]
}

pub fn ic_samples(g: &Graph, replicas: usize) -> LiveEdgeSampleSet {
    let spec = DiffusionSpec::new(DiffusionModel::Uic { p: 0.1 }, replicas, 7).expect("valid spec");
    sample_live_edges(g, &spec).expect("sampling succeeds")
}
