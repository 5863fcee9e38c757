//! Acceptance criteria, one PASS/FAIL line each.
//!
//! `cargo test -p goerw-cli --test acceptance -- 3 7` runs a subset.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::{brute_force_min, dyadic_weights, random_recursive_tree, rooted_trees};
use goerw::analysis::{gambler_ruin_exact, gambler_ruin_mc, phase_diagnostic, GamblerChain, PhaseConfig, Verdict};
use goerw::environment::{assign_deterministic, sample_random_environment, AlphaDistribution, Environment, Potentials};
use goerw::percolation::{concentration_experiment, edge_connection_probability_mc, quasi_independence_statistic};
use goerw::tree::{
    build_path, build_random, build_regular, min_cutset_sum, min_cutset_sum_profile, EdgeWeighting, LevelProfile,
    StandardFamily, Tree,
};
use goerw::walk::{restriction, simulate_extension, simulate_rubin, ClockTable, StopRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn listed<T: std::fmt::Debug>(bad: &[T]) -> String {
    if bad.is_empty() {
        String::new()
    } else {
        format!("; outside: {bad:?}")
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Every vertex has three children (the root has four).
fn ternary(depth: usize) -> Result<Tree, String> {
    build_regular(4, depth).map_err(err)
}

fn ruin_identity() -> Outcome {
    let tree = ternary(5)?;
    let envs = [
        ("srw", Environment::simple(&tree)),
        ("alpha=1", sample_random_environment(&tree, &AlphaDistribution::Point(1.0), 0).map_err(err)?),
    ];
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for (name, env) in &envs {
        let pot = Potentials::new(&tree, env).map_err(err)?;
        for d in 1..=5 {
            let e = tree.leftmost_at_depth(d).unwrap();
            let est = edge_connection_probability_mc(&tree, env, e, 100_000, 100 + d as u64).map_err(err)?;
            let exact = pot.ruin(e);
            let se = (exact * (1.0 - exact) / est.valid_trials as f64).sqrt();
            let z = (est.estimate - exact) / se;
            worst = worst.max(z.abs());
            if z.abs() > 3.0 || est.invalid_trials > 0 {
                bad.push(format!("{name} |e|={d}: {:.5} vs Ψ={exact:.5}", est.estimate));
            }
        }
    }
    check(bad.is_empty(), format!("10 edges, 1e5 samples each, max |z| = {worst:.2}{}", listed(&bad)))
}

fn coincidence() -> Outcome {
    let dist = AlphaDistribution::TwoPoint { a1: 0.0, a2: 2.0, p: 0.5 };
    let mut mismatches = 0;
    let mut total_steps = 0usize;
    for trial in 0..1000u64 {
        let tree = build_random(3, 1, 5, 5000 + trial % 50).map_err(err)?;
        let env = sample_random_environment(&tree, &dist, trial).map_err(err)?;
        let v = tree.len() - 1 - (trial as usize * 7919) % (tree.len() - 1);
        let clocks = ClockTable::new(trial);
        let walk = simulate_rubin(&tree, &env, clocks, &StopRule::max_steps(2000)).map_err(err)?;
        let r = restriction(&walk, &tree.path_from_root(v)).map_err(err)?;
        let ext =
            simulate_extension(&tree, &env, v, clocks, &StopRule::max_steps(r.killing_time as u64)).map_err(err)?;
        total_steps += r.positions.len();
        if ext.positions() != &r.positions[..] {
            mismatches += 1;
        }
    }
    check(mismatches == 0, format!("1000 trials, {total_steps} compared positions, {mismatches} mismatches"))
}

fn random_chain<R: Rng>(rng: &mut R) -> GamblerChain {
    let n = rng.random_range(2..=50);
    let biases = (1..n).map(|_| rng.random_range(0.2..5.0)).collect();
    GamblerChain::new(biases, rng.random_range(0..=n)).unwrap()
}

fn gambler() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut residual: f64 = 0.0;
    for _ in 0..1000 {
        let chain = random_chain(&mut rng);
        let x = chain.ruin_probabilities();
        residual = residual.max((x[0] - 1.0).abs()).max(x[chain.n()].abs());
        for i in 1..chain.n() {
            let mu = chain.bias(i);
            let (p, q) = (1.0 / (1.0 + mu), mu / (1.0 + mu));
            residual = residual.max((x[i] - (p * x[i + 1] + q * x[i - 1])).abs());
        }
    }
    let mut worst: f64 = 0.0;
    let mut mc_ok = true;
    for i in 0..10 {
        let chain = random_chain(&mut rng);
        let exact = gambler_ruin_exact(&chain);
        let (est, _) = gambler_ruin_mc(&chain, 100_000, 40 + i).map_err(err)?;
        let sigma = (exact * (1.0 - exact) / 100_000.0).sqrt();
        let d = (est - exact).abs();
        let z = if d == 0.0 { 0.0 } else { d / sigma };
        worst = worst.max(z);
        mc_ok &= z <= 3.0;
    }
    check(
        residual <= 1e-12 && mc_ok,
        format!("max residual {residual:.1e} over 1000 chains; 10 MC configurations, max |z| = {worst:.2}"),
    )
}

fn symmetric_closed_form() -> Outcome {
    let tree = build_path(1000).map_err(err)?;
    let pot = Potentials::new(&tree, &Environment::simple(&tree)).map_err(err)?;
    let (mut ruin_err, mut c_err): (f64, f64) = (0.0, 0.0);
    for e in 1..=1000 {
        ruin_err = ruin_err.max(rel(pot.ruin(e), 1.0 / e as f64));
        c_err = c_err.max(rel(pot.conductance(&tree, e).ok_or("infinite conductance")?, 1.0));
    }
    check(ruin_err <= 1e-12 && c_err <= 1e-12, format!("|e| ≤ 1000: max rel error Ψ {ruin_err:.1e}, c {c_err:.1e}"))
}

fn simplified_psi() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let alpha: f64 = rng.random_range(0.0..10.0);
        let deg: usize = rng.random_range(2..12);
        let depth: usize = rng.random_range(2..500);
        let mut counts = vec![1usize; depth - 1];
        counts.push(deg - 1);
        counts.extend(std::iter::repeat_n(0, deg - 1));
        let tree = Tree::from_child_counts(&counts).map_err(err)?;
        let p = depth - 1;
        let env = assign_deterministic(&tree, |v| if v == p { 1.0 + alpha * deg as f64 } else { 1.0 }, |_| 1.0)
            .map_err(err)?;
        let pot = Potentials::new(&tree, &env).map_err(err)?;
        let u = tree.children(p).start;
        let simplified = 1.0 - (2.0 * alpha + 1.0) / (alpha + 1.0) / depth as f64;
        worst = worst.max(rel(pot.psi(u), simplified));
    }
    check(worst <= 1e-12, format!("1000 triples, max rel error {worst:.1e}"))
}

fn cutset_dp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut cases, mut mismatches) = (0u64, 0u64);
    let small = rooted_trees(11);
    let mut trees: Vec<&Tree> = small.iter().filter(|t| t.num_edges() > 0).collect();
    let exhaustive = trees.len();
    let random: Vec<Tree> =
        (11..=20).flat_map(|edges| (0..20).map(move |_| edges)).map(|e| random_recursive_tree(e, &mut rng)).collect();
    trees.extend(random.iter());
    for tree in trees {
        for _ in 0..100 {
            let w = dyadic_weights(tree, &mut rng);
            let (dp, cut) =
                min_cutset_sum(tree, &EdgeWeighting::from_vec(tree, w.clone()).map_err(err)?).map_err(err)?;
            cases += 1;
            if dp != brute_force_min(tree, &w) || !cut.is_valid(tree) {
                mismatches += 1;
            }
        }
    }
    check(
        mismatches == 0,
        format!("{exhaustive} trees (all with ≤ 10 edges) + 200 random with 11–20 edges, 100 weightings each: {cases} cases, {mismatches} mismatches"),
    )
}

fn br_trend() -> Outcome {
    let depths: Vec<u64> = (3..=7).map(|k| 1u64 << k).collect();
    let mut lines = Vec::new();
    let mut ok = true;
    for b in [0.5f64, 1.5, 3.0] {
        let below = (b - 0.3).max(0.0);
        let above = b + 0.5;
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for &l in &depths {
            let profile = LevelProfile::polynomial(b, l).map_err(err)?;
            lo.push(min_cutset_sum_profile(&profile, below).0);
            hi.push(min_cutset_sum_profile(&profile, above).0);
        }
        let bounded = lo.iter().all(|&v| v >= 0.1);
        let falls = *hi.last().unwrap() < 0.01;
        ok &= bounded && falls;
        let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(",");
        lines.push(format!("b={b}: γ={below:.1} [{}] γ={above:.1} [{}]", fmt(&lo), fmt(&hi)));
    }
    check(ok, lines.join("; "))
}

fn phase_flip() -> Outcome {
    let run = |a: f64| {
        let mut cfg = PhaseConfig::new(StandardFamily::Polynomial(1.2), 64, AlphaDistribution::Point(a), 48);
        cfg.horizon = 1_000_000;
        cfg.trials = 2000;
        cfg.master_seed = 20;
        phase_diagnostic(&cfg)
    };
    let zero = run(0.0).map_err(err)?;
    let one = run(1.0).map_err(err)?;
    let (p0, p1) = (zero.run.escape_frequency, one.run.escape_frequency);
    let sigma = (zero.run.std_error.powi(2) + one.run.std_error.powi(2)).sqrt();
    let gap = (p0 - p1) / sigma;
    check(
        gap >= 3.0 && one.verdict == Verdict::RecurrentLeaning,
        format!(
            "br_r≈{:.2}; α=0 escape {p0:.4} ({}), α=1 escape {p1:.4} ({}), control {:.4}, gap {gap:.1}σ",
            zero.br_estimate, zero.verdict, one.verdict, one.control.escape_frequency
        ),
    )
}

fn quasi_independence() -> Outcome {
    let tree = ternary(4)?;
    let env = sample_random_environment(&tree, &AlphaDistribution::Point(1.0), 0).map_err(err)?;
    let c = |v: usize, i: usize| tree.children(v).start + i;
    let (a, b) = (c(0, 0), c(0, 1));
    let related = [
        (c(a, 0), c(a, 1)),
        (c(b, 1), c(b, 2)),
        (c(c(a, 0), 0), c(c(a, 0), 2)),
        (c(c(c(a, 1), 0), 0), c(c(c(a, 1), 0), 1)),
        (c(c(a, 0), 0), c(c(a, 1), 0)),
        (c(c(c(a, 0), 0), 0), c(c(c(a, 2), 1), 2)),
        (c(c(c(b, 0), 0), 1), c(c(c(b, 0), 2), 0)),
        (c(a, 0), c(c(a, 1), 1)),
        (c(b, 2), c(c(c(b, 0), 1), 1)),
        (c(c(a, 2), 2), c(c(c(a, 2), 0), 0)),
    ];
    let disjoint = [
        (c(0, 0), c(0, 2)),
        (c(a, 0), c(b, 0)),
        (c(c(a, 0), 0), c(c(b, 1), 1)),
        (c(c(c(a, 0), 0), 0), c(c(c(c(0, 2), 2), 2), 2)),
        (c(a, 1), c(c(c(c(0, 2), 0), 1), 1)),
    ];
    let mut m = 0.0;
    let mut worst_ratio: f64 = 0.0;
    let mut bad = Vec::new();
    for (i, &(e1, e2)) in related.iter().enumerate() {
        let q = quasi_independence_statistic(&tree, &env, e1, e2, 20_000, 70 + i as u64).map_err(err)?;
        m = q.m_bound;
        worst_ratio = worst_ratio.max(q.ratio);
        if q.common_edge.is_none() || q.k != 3.0 || !q.holds {
            bad.push((e1, e2));
        }
    }
    let mut worst_z: f64 = 0.0;
    for (i, &(e1, e2)) in disjoint.iter().enumerate() {
        let q = quasi_independence_statistic(&tree, &env, e1, e2, 20_000, 90 + i as u64).map_err(err)?;
        let z = (q.ratio - 1.0).abs() / q.ratio_se;
        worst_z = worst_z.max(z);
        if q.common_edge.is_some() || z > 3.0 {
            bad.push((e1, e2));
        }
    }
    check(
        bad.is_empty(),
        format!("M = {m:.0}; 10 related pairs, largest joint/product {worst_ratio:.2}; 5 disjoint pairs, max |ratio−1|/se {worst_z:.2}{}", listed(&bad)),
    )
}

fn concentration() -> Outcome {
    let tree = build_path(128).map_err(err)?;
    let dist = AlphaDistribution::TwoPoint { a1: 0.0, a2: 2.0, p: 0.5 };
    let table = concentration_experiment(&tree, &dist, 0.3, &[8, 16, 32, 64, 128], 1000, 10).map_err(err)?;
    let freqs: Vec<String> = table.rows.iter().map(|r| format!("{}:{:.3}", r.depth, r.frequency)).collect();
    check(table.nonincreasing_after(0, 2.0), format!("failure frequency by depth {}", freqs.join(" ")))
}

fn run_cli(args: &[&str], out: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let output = Command::new(env!("CARGO_BIN_EXE_goerw"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .env("GOERW_THREADS", "2")
        .output()
        .map_err(err)?;
    if !output.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&output.stderr)));
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .map_err(err)?
        .map(|e| {
            let e = e.map_err(err)?;
            Ok((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).map_err(err)?))
        })
        .collect::<Result<_, String>>()?;
    files.sort();
    files.push(("stdout".into(), output.stdout));
    Ok(files)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let config = dir.path().join("exp.toml");
    std::fs::write(
        &config,
        "[experiment]\noperation = \"simulate\"\nseed = 9\n\n[params]\ntree = \"poly:b=1.5,L=12\"\nenv = \"alpha:a1=0,a2=2,p=0.5\"\ntrials = 50\nsteps = 500\n",
    )
    .map_err(err)?;
    let config = config.to_string_lossy().into_owned();
    let commands: Vec<Vec<&str>> = vec![
        vec!["gen-tree", "--tree", "random:k=3,min=1,L=6,seed=4"],
        vec!["compute-psi", "--tree", "poly:b=1.5,L=16", "--env", "alpha:a1=0,a2=3,p=0.5", "--seed", "3"],
        vec!["simulate", "--tree", "regular:d=3,L=6", "--env", "alpha:point=1", "--trials", "50", "--steps", "400"],
        vec!["simulate", "--tree", "regular:d=3,L=6", "--trials", "50", "--steps", "400", "--rubin", "--seed", "2"],
        vec!["percolate", "--tree", "regular:d=3,L=4", "--env", "alpha:point=1", "--trials", "500", "--seed", "5"],
        vec![
            "percolate",
            "--tree",
            "regular:d=3,L=5",
            "--env",
            "alpha:a1=0,a2=2,p=0.5",
            "--samples",
            "20",
            "--seed",
            "5",
        ],
        vec!["estimate-br", "--tree", "poly:b=1.5", "--gamma-grid", "0.5:2.5:0.25", "--depths", "8,16,2^10"],
        vec![
            "estimate-rt",
            "--tree",
            "poly:b=1.5",
            "--env",
            "alpha:a1=0,a2=2,p=0.5",
            "--depths",
            "8,16,32",
            "--seed",
            "6",
        ],
        vec!["flow-check", "--tree", "poly:b=2,L=16", "--env", "alpha:point=0.5", "--gamma", "1", "--depths", "4,8,16"],
        vec![
            "phase-scan",
            "--tree",
            "poly:b=2.5,L=16",
            "--env",
            "alpha:point=0",
            "--escape-depth",
            "12",
            "--trials",
            "200",
            "--horizon",
            "20000",
            "--seed",
            "7",
        ],
        vec!["gambler", "--mu", "2,0.5,1.5,3", "--start", "2", "--trials", "2000", "--seed", "8"],
        vec![
            "concentration",
            "--tree",
            "path:L=64",
            "--env",
            "alpha:a1=0,a2=2,p=0.5",
            "--depths",
            "8,16,32,64",
            "--trials",
            "200",
        ],
        vec!["run", config.as_str()],
        vec!["run", config.as_str(), "--trials", "20", "--format", "json"],
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for (i, args) in commands.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("{i}a")))?;
        let b = run_cli(args, &dir.path().join(format!("{i}b")))?;
        files += a.len();
        if a != b {
            differing.push(args[0]);
        }
    }
    check(
        differing.is_empty(),
        format!(
            "{} invocations covering every subcommand, {files} outputs compared, differing: {differing:?}",
            commands.len()
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

const CRITERIA: [Criterion; 11] = [
    ("ruin probability matches connection frequency", ruin_identity),
    ("restriction coincides with the extension", coincidence),
    ("gambler's ruin exact and Monte Carlo", gambler),
    ("symmetric closed form Ψ = 1/|e|, c = 1", symmetric_closed_form),
    ("simplified ψ for α environments", simplified_psi),
    ("cutset DP equals brute force", cutset_dp),
    ("branching-ruin trend on polynomial trees", br_trend),
    ("phase flip between α ≡ 0 and α ≡ 1", phase_flip),
    ("quasi-independence of ruin percolation", quasi_independence),
    ("concentration failures shrink with depth", concentration),
    ("CLI reruns are byte-identical", determinism),
];

fn main() {
    let wanted: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failures = 0;
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let id = i + 1;
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id:>2} {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL {id:>2} {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
}
