use crate::{BlockSet, Error, Graph, Result};

use super::{domination_value, AttackMethod, AttackOutcome};

/// Maximum number of seed sets [`brute_force_br`] will enumerate.
pub const BRUTE_FORCE_LIMIT: u128 = 1_000_000;

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of subsets of `n` items with at most `k` elements.
pub(crate) fn subsets_up_to(n: usize, k: usize) -> u128 {
    (0..=k.min(n)).map(|j| binomial(n, j)).sum()
}

/// Visit every `k`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact best response by enumerating every seed set of size at most
/// `k_A` among unblocked nodes. Ties go to the lexicographically smallest
/// sorted seed list.
pub fn brute_force_br(g: &Graph, x: &BlockSet, k_a: usize) -> Result<AttackOutcome> {
    let blocked = x.mask(g.n())?;
    let free: Vec<usize> = (0..g.n()).filter(|&v| !blocked[v]).collect();
    let count = subsets_up_to(free.len(), k_a);
    if count > BRUTE_FORCE_LIMIT {
        return Err(Error::TooLarge(format!("{count} seed sets exceed the limit of {BRUTE_FORCE_LIMIT}")));
    }
    let mut best: (f64, Vec<usize>) = (0.0, Vec::new());
    let mut seeds = Vec::with_capacity(k_a);
    for size in 1..=k_a.min(free.len()) {
        for_each_combination(free.len(), size, |c| {
            seeds.clear();
            seeds.extend(c.iter().map(|&i| free[i]));
            let v = domination_value(g, &blocked, &seeds);
            if v > best.0 || (v == best.0 && seeds < best.1) {
                best = (v, seeds.clone());
            }
        });
    }
    Ok(AttackOutcome::plain(best.1, k_a, best.0, AttackMethod::BruteForce))
}
