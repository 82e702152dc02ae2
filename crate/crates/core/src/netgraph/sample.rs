use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Geometric};

use super::Graph;
use crate::error::{param, Result};
use crate::rng::{self, ids};

/// Forward-burning probability used when none is given.
pub const DEFAULT_FORWARD_BURN: f64 = 0.7;

/// Forest Fire sampling (forward burning only).
///
/// A fire starts at a random unburned ambassador; each burning node ignites
/// a geometric number (mean `p_f / (1 - p_f)`) of its unburned out-neighbors.
/// When the fire dies out a fresh ambassador is drawn. The result is the
/// induced subgraph on the first `target_n` burned nodes, in original index
/// order with labels and weights preserved.
pub fn forest_fire_sample(g: &Graph, target_n: usize, p_f: f64, seed: u64) -> Result<Graph> {
    if target_n == 0 {
        return param("sample size must be positive");
    }
    if target_n > g.n() {
        return param(format!("sample size {target_n} exceeds graph size {}", g.n()));
    }
    if !(0.0..1.0).contains(&p_f) {
        return param(format!("forward-burn probability {p_f} outside [0, 1)"));
    }
    let mut rng = rng::stream(seed, ids::FOREST_FIRE);
    let spread = Geometric::new(1.0 - p_f).map_err(|e| crate::Error::Parameter(e.to_string()))?;
    let mut burned = vec![false; g.n()];
    let mut count = 0;
    let mut queue = std::collections::VecDeque::new();
    let mut unburned_nbrs = Vec::new();
    'outer: while count < target_n {
        let remaining: Vec<usize> = (0..g.n()).filter(|&v| !burned[v]).collect();
        let ambassador = remaining[rng.random_range(0..remaining.len())];
        burned[ambassador] = true;
        count += 1;
        queue.clear();
        queue.push_back(ambassador);
        while let Some(v) = queue.pop_front() {
            if count >= target_n {
                break 'outer;
            }
            unburned_nbrs.clear();
            unburned_nbrs.extend(g.out_neighbors(v).iter().copied().filter(|&u| !burned[u]));
            let want = spread.sample(&mut rng) as usize;
            unburned_nbrs.shuffle(&mut rng);
            for &u in unburned_nbrs.iter().take(want) {
                if count >= target_n {
                    break 'outer;
                }
                burned[u] = true;
                count += 1;
                queue.push_back(u);
            }
        }
    }
    let keep: Vec<usize> = (0..g.n()).filter(|&v| burned[v]).collect();
    Ok(g.induced(&keep)?.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{component_sizes, gen_er};

    #[test]
    fn full_burn_is_identity() {
        let g = gen_er(30, 0.2, 1).unwrap();
        assert_eq!(forest_fire_sample(&g, 30, 0.7, 4).unwrap(), g);
    }

    #[test]
    fn single_node_sample() {
        let g = gen_er(30, 0.2, 1).unwrap();
        let s = forest_fire_sample(&g, 1, 0.7, 4).unwrap();
        assert_eq!((s.n(), s.m()), (1, 0));
    }

    #[test]
    fn rejects_bad_sizes() {
        let g = gen_er(10, 0.2, 1).unwrap();
        assert!(forest_fire_sample(&g, 0, 0.7, 1).is_err());
        assert!(forest_fire_sample(&g, 11, 0.7, 1).is_err());
        assert!(forest_fire_sample(&g, 5, 1.0, 1).is_err());
    }

    #[test]
    fn er_sample_structure_on_fixed_seed() {
        let g = gen_er(200, 0.05, 21).unwrap();
        let s = forest_fire_sample(&g, 50, DEFAULT_FORWARD_BURN, 8).unwrap();
        assert_eq!(s.n(), 50);
        let labels: Vec<usize> = s.labels().iter().map(|l| l.parse().unwrap()).collect();
        assert!(labels.windows(2).all(|w| w[0] < w[1]));
        let comps = component_sizes(&s);
        assert_eq!(comps.iter().sum::<usize>(), 50);
        assert_eq!(s, forest_fire_sample(&g, 50, DEFAULT_FORWARD_BURN, 8).unwrap());
    }
}
