use std::collections::HashMap;

use goerw::environment::{assign_deterministic, sample_random_environment, AlphaDistribution, Environment};
use goerw::tree::{build_path, build_random, build_regular, Tree};
use goerw::walk::{
    restriction, simulate, simulate_extension, simulate_rubin, step_direct, ClockTable, StopReason, StopRule,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Exact law of the first `k` steps, by enumeration of every path.
fn path_law(tree: &Tree, env: &Environment, k: usize) -> HashMap<Vec<usize>, f64> {
    fn go(tree: &Tree, env: &Environment, path: &mut Vec<usize>, p: f64, k: usize, out: &mut HashMap<Vec<usize>, f64>) {
        if path.len() == k + 1 {
            out.insert(path.clone(), p);
            return;
        }
        let v = *path.last().unwrap();
        let visits = path.iter().filter(|&&x| x == v).count();
        let kids: Vec<usize> = tree.children(v).collect();
        let mut moves: Vec<(usize, f64)> = Vec::new();
        if v == 0 {
            moves.extend(kids.iter().map(|&c| (c, 1.0)));
        } else {
            let bias = if visits == 1 { env.lambda(v) } else { env.mu(v) };
            moves.push((tree.parent(v).unwrap(), bias));
            moves.extend(kids.iter().map(|&c| (c, 1.0)));
        }
        let total: f64 = moves.iter().map(|m| m.1).sum();
        for (w, weight) in moves {
            path.push(w);
            go(tree, env, path, p * weight / total, k, out);
            path.pop();
        }
    }
    let mut out = HashMap::new();
    go(tree, env, &mut vec![0], 1.0, k, &mut out);
    out
}

/// Pearson goodness-of-fit p-value, pooling cells with expectation below 5.
fn chi_square_p(law: &HashMap<Vec<usize>, f64>, counts: &HashMap<Vec<usize>, u64>, n: u64) -> f64 {
    let mut stat = 0.0;
    let mut cells = 0;
    let (mut pooled_e, mut pooled_o) = (0.0, 0.0);
    for (path, &p) in law {
        let e = p * n as f64;
        let o = *counts.get(path).unwrap_or(&0) as f64;
        if e < 5.0 {
            pooled_e += e;
            pooled_o += o;
        } else {
            stat += (o - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_e > 0.0 {
        stat += (pooled_o - pooled_e).powi(2) / pooled_e;
        cells += 1;
    }
    assert_eq!(counts.keys().filter(|k| !law.contains_key(*k)).count(), 0, "impossible path sampled");
    1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat)
}

fn test_env(tree: &Tree) -> Environment {
    assign_deterministic(tree, |v| 0.5 + (v % 4) as f64, |v| 0.25 + (v % 3) as f64).unwrap()
}

#[test]
fn direct_walk_follows_transition_law() {
    let tree = build_regular(3, 6).unwrap();
    let env = test_env(&tree);
    let k = 5;
    let law = path_law(&tree, &env, k);
    let n = 200_000u64;
    let mut counts = HashMap::new();
    for seed in 0..n {
        let tr = simulate(&tree, &env, &StopRule::max_steps(k as u64), seed).unwrap();
        *counts.entry(tr.positions().to_vec()).or_insert(0u64) += 1;
    }
    assert!(chi_square_p(&law, &counts, n) > 1e-4);
}

#[test]
fn rubin_walk_follows_transition_law() {
    // deep enough that no path of length 5 reaches the truncation level
    let tree = build_regular(3, 6).unwrap();
    let env = test_env(&tree);
    let k = 5;
    let law = path_law(&tree, &env, k);
    let n = 200_000u64;
    let mut counts = HashMap::new();
    for seed in 0..n {
        let tr = simulate_rubin(&tree, &env, ClockTable::new(seed), &StopRule::max_steps(k as u64)).unwrap();
        *counts.entry(tr.positions().to_vec()).or_insert(0u64) += 1;
    }
    assert!(chi_square_p(&law, &counts, n) > 1e-4);
}

#[test]
fn one_step_frequencies() {
    let tree = build_regular(4, 2).unwrap();
    let env = test_env(&tree);
    let v = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for visit in [1u64, 3] {
        let n = 100_000;
        let mut counts = HashMap::new();
        for _ in 0..n {
            *counts.entry(step_direct(&tree, &env, v, visit, &mut rng)).or_insert(0u64) += 1;
        }
        let bias = if visit == 1 { env.lambda(v) } else { env.mu(v) };
        let total = bias + tree.num_children(v) as f64;
        for w in tree.neighbors(v) {
            let p = if w == 0 { bias / total } else { 1.0 / total };
            let f = counts[&w] as f64 / n as f64;
            assert!((f - p).abs() <= 4.0 * (p * (1.0 - p) / n as f64).sqrt(), "w={w} f={f} p={p}");
        }
    }
}

#[test]
fn extension_coincides_with_restriction() {
    let mut mismatches = 0;
    for trial in 0..1000u64 {
        let tree = build_random(3, 1, 5, 1000 + trial % 20).unwrap();
        let env =
            sample_random_environment(&tree, &AlphaDistribution::TwoPoint { a1: 0.0, a2: 2.0, p: 0.5 }, trial).unwrap();
        let v = tree.len() - 1 - (trial as usize * 7919) % (tree.len() - 1);
        let clocks = ClockTable::new(trial);
        let walk = simulate_rubin(&tree, &env, clocks, &StopRule::max_steps(2000)).unwrap();
        let r = restriction(&walk, &tree.path_from_root(v)).unwrap();
        let ext = simulate_extension(&tree, &env, v, clocks, &StopRule::max_steps(r.killing_time as u64)).unwrap();
        if ext.positions() != &r.positions[..] {
            mismatches += 1;
        }
    }
    assert_eq!(mismatches, 0);
}

#[test]
fn escape_and_return_reasons() {
    let tree = build_path(4).unwrap();
    let env = Environment::constant(&tree, 0.01, 0.01).unwrap();
    let tr = simulate(&tree, &env, &StopRule::max_steps(1000), 3).unwrap();
    assert_eq!(tr.summary().reason, StopReason::Escaped);
    let env = Environment::constant(&tree, 100.0, 100.0).unwrap();
    let tr = simulate(&tree, &env, &StopRule::return_to_root(), 3).unwrap();
    assert_eq!(tr.summary().reason, StopReason::ReturnedToRoot);
    assert_eq!(tr.first_return(), Some(2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn trajectories_are_nearest_neighbour(seed in any::<u64>(), steps in 0u64..500) {
        let tree = build_regular(3, 6).unwrap();
        let env = sample_random_environment(&tree, &AlphaDistribution::Point(0.5), seed).unwrap();
        let a = simulate(&tree, &env, &StopRule::max_steps(steps), seed).unwrap();
        prop_assert!(a.is_consistent(&tree));
        prop_assert_eq!(a.positions().len(), a.steps() + 1);
        let b = simulate_rubin(&tree, &env, ClockTable::new(seed), &StopRule::max_steps(steps)).unwrap();
        prop_assert!(b.is_consistent(&tree));
    }

    #[test]
    fn same_seed_same_path(seed in any::<u64>()) {
        let tree = build_regular(3, 5).unwrap();
        let env = Environment::constant(&tree, 2.0, 1.0).unwrap();
        let stop = StopRule::max_steps(300);
        prop_assert_eq!(simulate(&tree, &env, &stop, seed).unwrap(), simulate(&tree, &env, &stop, seed).unwrap());
        prop_assert_eq!(
            simulate_rubin(&tree, &env, ClockTable::new(seed), &stop).unwrap(),
            simulate_rubin(&tree, &env, ClockTable::new(seed), &stop).unwrap()
        );
    }

    #[test]
    fn local_times_add_up(seed in any::<u64>()) {
        let tree = build_regular(3, 4).unwrap();
        let tr = simulate(&tree, &Environment::simple(&tree), &StopRule::max_steps(200), seed).unwrap();
        let total: u64 = (0..tree.len()).map(|x| tr.visit_count(x)).sum();
        prop_assert_eq!(total as usize, tr.positions().len());
        let crossings: u64 = (1..tree.len()).map(|v| tr.crossings(tree.parent(v).unwrap(), v) + tr.crossings(v, tree.parent(v).unwrap())).sum();
        prop_assert_eq!(crossings as usize, tr.steps());
    }
}
