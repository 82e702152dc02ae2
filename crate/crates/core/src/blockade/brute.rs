use serde_json::json;

use crate::adversary::brute_force_br;
use crate::error::param;
use crate::{BlockSet, Error, Graph, Result};

use super::DefenseResult;

/// Cap on (defender choices) x (attacker choices) for the exhaustive
/// defenses.
pub const DEFENSE_ENUMERATION_LIMIT: u128 = 10_000_000;

fn attack_count(free: usize, k_a: usize) -> u128 {
    crate::adversary::brute::subsets_up_to(free, k_a)
}

/// Exact defense: every block set of size at most `k_D`, each scored by
/// the exhaustive best response. Ties go to the lexicographically smallest
/// sorted block list.
pub fn brute_force_defense(g: &Graph, k_d: usize, k_a: usize) -> Result<DefenseResult> {
    if k_d > g.n() {
        return param(format!("defense budget {k_d} exceeds {} nodes", g.n()));
    }
    let n = g.n();
    let total = crate::adversary::brute::subsets_up_to(n, k_d) * attack_count(n, k_a);
    if total > DEFENSE_ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("{total} defense and attack pairs exceed {DEFENSE_ENUMERATION_LIMIT}")));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut failure = None;
    for size in 0..=k_d {
        crate::adversary::brute::for_each_combination(n, size, |c| {
            if failure.is_some() {
                return;
            }
            match brute_force_br(g, &BlockSet::exact(c.iter().copied()), k_a) {
                Ok(a) => {
                    let better = match &best {
                        None => true,
                        Some((v, b)) => a.value < *v || (a.value == *v && c < b.as_slice()),
                    };
                    if better {
                        best = Some((a.value, c.to_vec()));
                    }
                }
                Err(e) => failure = Some(e),
            }
        });
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let (value, blocked) = best.expect("the empty block set is always scored");
    Ok(DefenseResult::new(BlockSet::new(blocked, k_d)?, value, "brute-force", json!({ "k_d": k_d, "k_a": k_a })))
}

/// Exact joint node and edge defense. Plans that block an edge touching a
/// blocked node are skipped: they cost more and do nothing extra.
pub fn brute_force_ev_defense(g: &Graph, c_n: f64, c_e: f64, b_d: f64, k_a: usize) -> Result<DefenseResult> {
    if !(c_n > 0.0 && c_e > 0.0) {
        return param(format!("blocking costs must be positive (node {c_n}, edge {c_e})"));
    }
    let n = g.n();
    let edges = g.edges();
    let max_nodes = ((b_d / c_n).floor() as usize).min(n);
    let max_edges = ((b_d / c_e).floor() as usize).min(edges.len());
    let plans = crate::adversary::brute::subsets_up_to(n, max_nodes)
        * crate::adversary::brute::subsets_up_to(edges.len(), max_edges);
    let total = plans * attack_count(n, k_a);
    if total > DEFENSE_ENUMERATION_LIMIT {
        return Err(Error::TooLarge(format!("{total} plan and attack pairs exceed {DEFENSE_ENUMERATION_LIMIT}")));
    }
    let mut best: Option<(f64, Vec<usize>, Vec<(usize, usize)>)> = None;
    for ns in 0..=max_nodes {
        let mut node_sets = Vec::new();
        crate::adversary::brute::for_each_combination(n, ns, |c| node_sets.push(c.to_vec()));
        for nodes in node_sets {
            let left = b_d - ns as f64 * c_n;
            let allowed: Vec<(usize, usize)> =
                edges.iter().copied().filter(|(u, v)| !nodes.contains(u) && !nodes.contains(v)).collect();
            let me = ((left / c_e + 1e-9).floor().max(0.0) as usize).min(allowed.len());
            let x = BlockSet::exact(nodes.iter().copied());
            for es in 0..=me {
                let mut edge_sets = Vec::new();
                crate::adversary::brute::for_each_combination(allowed.len(), es, |c| {
                    edge_sets.push(c.iter().map(|&i| allowed[i]).collect::<Vec<_>>())
                });
                for cut in edge_sets {
                    let value = brute_force_br(&g.without_edges(&cut)?, &x, k_a)?.value;
                    let better = match &best {
                        None => true,
                        Some((v, bn, be)) => value < *v || (value == *v && (&nodes, &cut) < (bn, be)),
                    };
                    if better {
                        best = Some((value, nodes.clone(), cut));
                    }
                }
            }
        }
    }
    let (value, nodes, cut) = best.expect("the empty plan is always scored");
    let mut out = DefenseResult::new(
        BlockSet::exact(nodes),
        value,
        "brute-force-ev",
        json!({ "c_n": c_n, "c_e": c_e, "b_d": b_d, "k_a": k_a }),
    );
    out.blocked_edges = cut;
    Ok(out)
}
