use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn knapsack() -> Model {
    let mut m = Model::new("knapsack", Sense::Maximize);
    let a = m.binary("a", 10.0);
    let b = m.binary("b", 6.0);
    let c = m.binary("c", 4.0);
    m.add_row("cap", [(a, 5.0), (b, 4.0), (c, 3.0)], Cmp::Le, 8.0);
    m
}

fn assert_strong_duality(model: &Model, r: &SolveResult) {
    let dual = r.dual_objective(model).expect("duals");
    assert!(
        (dual - r.objective).abs() <= 1e-6 * (1.0 + r.objective.abs()),
        "primal {} dual {}",
        r.objective,
        dual
    );
}

#[test]
fn single_row_dual() {
    let mut m = Model::new("one", Sense::Maximize);
    let x = m.continuous("x", 0.0, f64::INFINITY, 1.0);
    m.add_row("cap", [(x, 1.0)], Cmp::Le, 3.0);
    let r = solve_lp(&m);
    assert_eq!(r.status, Status::Optimal);
    assert_eq!(r.objective, 3.0);
    assert!((r.duals.as_ref().unwrap()[0] - 1.0).abs() < 1e-12);
    assert_strong_duality(&m, &r);
}

#[test]
fn infeasible_pair() {
    let mut m = Model::new("bad", Sense::Minimize);
    let x = m.continuous("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    m.add_row("a", [(x, 1.0)], Cmp::Le, -1.0);
    m.add_row("b", [(x, 1.0)], Cmp::Ge, 0.0);
    assert_eq!(solve_lp(&m).status, Status::Infeasible);
    assert_eq!(solve_milp(&m, &MilpParams::default()).status, Status::Infeasible);
}

#[test]
fn unbounded_lp() {
    let mut m = Model::new("open", Sense::Maximize);
    let x = m.continuous("x", 0.0, f64::INFINITY, 1.0);
    let y = m.continuous("y", 0.0, f64::INFINITY, 0.0);
    m.add_row("a", [(x, 1.0), (y, -1.0)], Cmp::Le, 2.0);
    assert_eq!(solve_lp(&m).status, Status::Unbounded);
}

#[test]
fn knapsack_optimum() {
    let m = knapsack();
    let r = solve_milp(&m, &MilpParams::default());
    assert_eq!(r.status, Status::Optimal);
    // {a, b} weighs 9, so the best packing is {a, c}.
    assert!((r.objective - 14.0).abs() < 1e-9, "{r:?}");
    assert_eq!(r.values, vec![1.0, 0.0, 1.0]);
    assert!((enumerate(&m) - 14.0).abs() < 1e-9);
    assert!(r.bound >= r.objective - 1e-9);
    assert!(check_solution(&m, &r.values, 1e-6).unwrap().is_empty());
}

#[test]
fn continuous_milp_matches_lp() {
    let m = knapsack().relaxed();
    let a = solve_lp(&m);
    let b = solve_milp(&m, &MilpParams::default());
    assert_eq!(a.status, b.status);
    assert_eq!(a.values, b.values);
    assert_eq!(a.objective, b.objective);
    // 10a + 6b + 4c with ratios 2, 1.5, 1.33: a = 1, b = 3/4.
    assert!((a.objective - 14.5).abs() < 1e-9);
}

#[test]
fn check_reports() {
    let m = knapsack();
    let v = check_solution(&m, &[1.0, 1.0, 1.0], 1e-6).unwrap();
    assert_eq!(v.len(), 1);
    assert!(matches!(&v[0], Violation::Row { row: 0, amount, .. } if (*amount - 4.0).abs() < 1e-12));
    let v = check_solution(&m, &[0.5, 1.0, 0.0], 1e-6).unwrap();
    assert_eq!(v.len(), 1);
    assert!(matches!(&v[0], Violation::Integrality { var: 0, .. }));
    let v = check_solution(&m, &[0.0, 1.0, 1.5], 1e-6).unwrap();
    assert!(v.iter().any(|x| matches!(x, Violation::Bound { var: 2, .. })));
    assert!(matches!(
        check_solution(&m, &[0.0], 1e-6),
        Err(crate::Error::Dimension { expected: 3, actual: 1 })
    ));
}

#[test]
fn lp_round_trip() {
    let mut m = knapsack();
    let z = m.continuous("z", f64::NEG_INFINITY, 2.5, -0.1);
    m.add_row("mix", [(VarId(0), -1.0 / 3.0), (z, 1e-7)], Cmp::Eq, 0.0);
    m.add_row("ge", [(z, 2.0)], Cmp::Ge, -4.0);
    let text = write_lp(&m);
    let back = read_lp(&text).unwrap();
    assert_eq!(back, m);
}

#[test]
fn read_lp_rejects_garbage() {
    assert!(read_lp("Maximize\n obj: + x\nEnd\n").is_err());
    assert!(matches!(read_lp("hello\n"), Err(crate::Error::Parse { line: 1, .. })));
}

#[test]
fn unknown_backend() {
    let reg = Registry::default();
    assert!(matches!(reg.get("cplex"), Err(crate::Error::Config(_))));
    assert_eq!(reg.get("reference").unwrap().name(), "reference");
}

#[test]
fn deterministic() {
    let m = random_milp(&mut ChaCha8Rng::seed_from_u64(3), 12, 6);
    let a = solve_milp(&m, &MilpParams::default());
    let b = solve_milp(&m, &MilpParams::default());
    assert_eq!(a.values, b.values);
    assert_eq!(a.nodes, b.nodes);
    assert_eq!(a.iterations, b.iterations);
}

/// A bounded, always feasible mixed model: `x = 0` satisfies every row.
fn random_milp(rng: &mut ChaCha8Rng, nbin: usize, ncont: usize) -> Model {
    let sense = if rng.random_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    let mut m = Model::new("rand", sense);
    let mut vars = Vec::new();
    for i in 0..nbin {
        vars.push(m.binary(format!("b{i}"), rng.random_range(-10..=10) as f64));
    }
    for i in 0..ncont {
        let ub = rng.random_range(1..=5) as f64;
        vars.push(m.continuous(format!("c{i}"), 0.0, ub, rng.random_range(-10..=10) as f64 / 2.0));
    }
    let rows = rng.random_range(2..=6);
    for r in 0..rows {
        let mut terms: Vec<(VarId, f64)> = Vec::new();
        for &v in &vars {
            if rng.random_bool(0.6) {
                terms.push((v, rng.random_range(-6..=9) as f64));
            }
        }
        m.add_row(format!("r{r}"), terms, Cmp::Le, rng.random_range(0..=12) as f64);
    }
    if rng.random_bool(0.5) {
        let terms: Vec<(VarId, f64)> = vars.iter().map(|&v| (v, 1.0)).collect();
        m.add_row("cover", terms, Cmp::Ge, 0.0);
    }
    m
}

/// Exhaustive search over binary assignments, each completed by an LP.
fn enumerate(m: &Model) -> f64 {
    let bins: Vec<usize> = (0..m.num_vars()).filter(|&j| m.vars[j].kind == VarKind::Binary).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << bins.len()) {
        let mut fixed = m.relaxed();
        for (k, &j) in bins.iter().enumerate() {
            let v = f64::from((mask >> k) & 1);
            fixed.vars[j].lower = v;
            fixed.vars[j].upper = v;
        }
        let r = solve_lp(&fixed);
        if r.status == Status::Optimal {
            best = Some(match (best, m.sense) {
                (None, _) => r.objective,
                (Some(b), Sense::Maximize) => b.max(r.objective),
                (Some(b), Sense::Minimize) => b.min(r.objective),
            });
        }
    }
    best.expect("feasible by construction")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lp_strong_duality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_milp(&mut rng, 6, 6).relaxed();
        let r = solve_lp(&m);
        prop_assert_eq!(r.status, Status::Optimal);
        prop_assert!(check_solution(&m, &r.values, 1e-6).unwrap().is_empty());
        assert_strong_duality(&m, &r);
    }

    #[test]
    fn branch_and_bound_matches_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nbin = rng.random_range(1..=8);
        let m = random_milp(&mut rng, nbin, 3);
        let params = MilpParams { abs_gap: 0.0, rel_gap: 0.0, ..MilpParams::default() };
        let r = solve_milp(&m, &params);
        prop_assert_eq!(r.status, Status::Optimal);
        prop_assert!(check_solution(&m, &r.values, 1e-6).unwrap().is_empty());
        let exact = enumerate(&m);
        prop_assert!((r.objective - exact).abs() < 1e-6, "{} vs {}", r.objective, exact);
        match m.sense {
            Sense::Maximize => prop_assert!(r.objective <= r.bound + 1e-9),
            Sense::Minimize => prop_assert!(r.objective >= r.bound - 1e-9),
        }
    }
}

#[test]
fn twenty_binaries_match_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let m = random_milp(&mut rng, 14, 0);
    let params = MilpParams { abs_gap: 0.0, rel_gap: 0.0, ..MilpParams::default() };
    let r = solve_milp(&m, &params);
    assert!((r.objective - enumerate(&m)).abs() < 1e-6);
}

fn scipy_available() -> bool {
    std::process::Command::new("python3")
        .args(["-c", "import scipy.optimize"])
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

#[test]
fn scipy_cross_check() {
    if !scipy_available() {
        eprintln!("scipy not importable; skipping external cross-check");
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let params = MilpParams { abs_gap: 0.0, rel_gap: 0.0, ..MilpParams::default() };
    for _ in 0..20 {
        let nbin = rng.random_range(2..=10);
        let m = random_milp(&mut rng, nbin, 4);
        let ours = solve_milp(&m, &params);
        let theirs = external_backend("scipy", &m, &params).unwrap();
        assert_eq!(theirs.status, Status::Optimal);
        assert!((ours.objective - theirs.objective).abs() < 1e-6, "{} vs {}", ours.objective, theirs.objective);
    }
}
