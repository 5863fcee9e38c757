//! One function per operation, each turning a merged [`Experiment`] into a [`Report`].

use goerw::analysis::{
    flow_energy_check, gambler_ruin_exact, gambler_ruin_mc, gambler_ruin_rational, phase_diagnostic, BigRational,
    GamblerChain, PhaseConfig,
};
use goerw::environment::{rt_estimate, rt_hypothesis_sup, EnvError, Environment, Potentials};
use goerw::percolation::{
    concentration_experiment, edge_connection_probability_mc, quasi_independence_constant, sample_ruin_percolation,
};
use goerw::seed::derive_seed;
use goerw::stats::Proportion;
use goerw::tree::{branching_ruin_estimate, write_tree, Tree};
use goerw::walk::{simulate, simulate_rubin, ClockTable, StopReason, StopRule};
use num_bigint::BigInt;
use serde_json::json;

use crate::config::{Experiment, ListValue, Operation};
use crate::spec::{EnvSpec, TreeSpec};
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Table {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Table(Table),
    /// A text artifact with its file name.
    Text {
        file: &'static str,
        content: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub verdict: Option<String>,
    pub statistics: serde_json::Value,
    pub data: Data,
}

fn required<'a, T>(value: &'a Option<T>, key: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::Usage { key: key.to_string(), msg: "required".into() })
}

fn usage(key: &str, msg: impl Into<String>) -> CliError {
    CliError::Usage { key: key.to_string(), msg: msg.into() }
}

fn f(x: f64) -> String {
    x.to_string()
}

fn reason_name(r: StopReason) -> String {
    serde_json::to_value(r).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

struct Inputs {
    tree: TreeSpec,
    env: EnvSpec,
}

fn inputs(exp: &Experiment, default_env: &str) -> Result<Inputs, CliError> {
    let tree = TreeSpec::parse(required(&exp.params.tree, "tree")?)?;
    let env = EnvSpec::parse(exp.params.env.as_deref().unwrap_or(default_env))?;
    Ok(Inputs { tree, env })
}

pub fn execute(exp: &Experiment) -> Result<Report, CliError> {
    match exp.operation {
        Operation::GenTree => gen_tree(exp),
        Operation::ComputePsi => compute_psi(exp),
        Operation::Simulate => simulate_op(exp),
        Operation::Percolate => percolate(exp),
        Operation::EstimateBr => estimate_br(exp),
        Operation::EstimateRt => estimate_rt(exp),
        Operation::FlowCheck => flow_check(exp),
        Operation::PhaseScan => phase_scan(exp),
        Operation::Gambler => gambler(exp),
        Operation::Concentration => concentration(exp),
    }
}

fn gen_tree(exp: &Experiment) -> Result<Report, CliError> {
    let tree = TreeSpec::parse(required(&exp.params.tree, "tree")?)?.build(exp.params.depth)?;
    let mut content = Vec::new();
    write_tree(&tree, &mut content).map_err(|e| CliError::Io(e.to_string()))?;
    Ok(Report {
        verdict: None,
        statistics: json!({
            "vertices": tree.len(),
            "edges": tree.num_edges(),
            "depth": tree.truncation_depth(),
            "level_sizes": tree.level_sizes(),
        }),
        data: Data::Text { file: "tree.txt", content: String::from_utf8(content).expect("tree files are ASCII") },
    })
}

fn compute_psi(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "srw")?;
    let tree = inp.tree.build(exp.params.depth)?;
    let env = inp.env.build(&tree, exp.seed)?;
    let pot = Potentials::new(&tree, &env)?;
    let edges: Vec<usize> = match exp.params.edge_depth {
        Some(d) => vec![tree.leftmost_at_depth(d).filter(|_| d > 0).ok_or_else(|| {
            usage("edge_depth", format!("no edge at depth {d} (tree depth {})", tree.truncation_depth()))
        })?],
        None => (1..tree.len()).collect(),
    };
    let mut table =
        Table::new(&["edge", "parent", "depth", "lambda", "mu", "resistance", "phi", "psi", "ruin", "conductance"]);
    for &e in &edges {
        let p = tree.parent(e).unwrap();
        let c = pot.conductance(&tree, e).map_or_else(|| "inf".to_string(), f);
        table.push(vec![
            e.to_string(),
            p.to_string(),
            tree.depth(e).to_string(),
            f(env.lambda(p)),
            f(env.mu(p)),
            f(pot.resistance(e)),
            f(pot.phi(e)),
            f(pot.psi(e)),
            f(pot.ruin(e)),
            c,
        ]);
    }
    let (k, m) = quasi_independence_constant(&tree, &pot);
    let mut stats = json!({
        "vertices": tree.len(),
        "edges_reported": edges.len(),
        "hypothesis_sup": rt_hypothesis_sup(&tree, &pot),
        "k": k,
        "m_bound": m,
    });
    if let (Some(&e), true) = (edges.first(), edges.len() == 1) {
        stats["edge"] = json!({
            "id": e,
            "depth": tree.depth(e),
            "psi": pot.psi(e),
            "ruin": pot.ruin(e),
            "conductance": pot.conductance(&tree, e),
        });
    }
    Ok(Report { verdict: None, statistics: stats, data: Data::Table(table) })
}

fn stop_rule(exp: &Experiment) -> StopRule {
    let p = &exp.params;
    let mut stop = StopRule::max_steps(p.steps.unwrap_or(if p.hit_depth.is_some() || p.returns.is_some() {
        goerw::walk::DEFAULT_HARD_CAP
    } else {
        1000
    }));
    if let Some(d) = p.hit_depth {
        stop = stop.or_hit_depth(d);
    }
    if let Some(k) = p.returns {
        stop = stop.or_returns(k);
    }
    stop
}

fn simulate_op(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "srw")?;
    let tree = inp.tree.build(exp.params.depth)?;
    let env = inp.env.build(&tree, exp.seed)?;
    let stop = stop_rule(exp);
    let trials = exp.params.trials.unwrap_or(1);
    let rubin = exp.params.rubin.unwrap_or(false);
    let mut table = Table::new(&["trial", "steps", "returns", "max_depth", "reason"]);
    let mut escapes = 0;
    let mut total_steps = 0u64;
    for i in 0..trials {
        let s = derive_seed(exp.seed, i);
        let tr = if rubin {
            simulate_rubin(&tree, &env, ClockTable::new(s), &stop)?
        } else {
            simulate(&tree, &env, &stop, s)?
        };
        let sum = tr.summary();
        escapes += u64::from(matches!(sum.reason, StopReason::HitDepth | StopReason::Escaped));
        total_steps += sum.steps;
        table.push(vec![
            i.to_string(),
            sum.steps.to_string(),
            sum.returns_to_root.to_string(),
            sum.max_depth.to_string(),
            reason_name(sum.reason),
        ]);
    }
    let p = Proportion::new(escapes, trials.max(1));
    Ok(Report {
        verdict: None,
        statistics: json!({
            "trials": trials,
            "construction": if rubin { "rubin" } else { "direct" },
            "escape_frequency": p.estimate(),
            "escape_std_error": p.std_error(),
            "mean_steps": total_steps as f64 / trials.max(1) as f64,
        }),
        data: Data::Table(table),
    })
}

fn percolate(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "srw")?;
    let tree = inp.tree.build(None)?;
    let env = inp.env.build(&tree, exp.seed)?;
    let pot = Potentials::new(&tree, &env)?;
    let max_depth = exp.params.edge_depth.or(exp.params.depth).unwrap_or(tree.truncation_depth());
    if max_depth == 0 || max_depth > tree.truncation_depth() {
        return Err(usage("depth", format!("edge depth must lie in 1..={}", tree.truncation_depth())));
    }
    if let Some(n) = exp.params.samples {
        return percolation_samples(&tree, &env, max_depth, n, exp.seed);
    }
    let trials = exp.params.trials.unwrap_or(10_000);
    let mut table = Table::new(&["depth", "edge", "ruin", "estimate", "std_error", "z", "invalid_trials"]);
    let mut worst: f64 = 0.0;
    for d in 1..=max_depth {
        let e = tree.leftmost_at_depth(d).unwrap();
        let est = edge_connection_probability_mc(&tree, &env, e, trials, derive_seed(exp.seed, d as u64))?;
        let exact = pot.ruin(e);
        let se = est.std_error.max((exact * (1.0 - exact) / est.valid_trials as f64).sqrt());
        let z = if se > 0.0 { (est.estimate - exact) / se } else { 0.0 };
        worst = worst.max(z.abs());
        table.push(vec![
            d.to_string(),
            e.to_string(),
            f(exact),
            f(est.estimate),
            f(est.std_error),
            f(z),
            est.invalid_trials.to_string(),
        ]);
    }
    Ok(Report {
        verdict: None,
        statistics: json!({ "trials": trials, "max_abs_z": worst, "within_3_se": worst <= 3.0 }),
        data: Data::Table(table),
    })
}

/// One row per edge and sample, with the edge named by its endpoints.
fn percolation_samples(
    tree: &Tree,
    env: &Environment,
    max_depth: usize,
    n: u64,
    seed: u64,
) -> Result<Report, CliError> {
    let mut table = Table::new(&["parent_id", "child_id", "open", "in_cluster", "sample_index"]);
    let mut invalid = 0u64;
    let mut cluster_sizes = Vec::with_capacity(n as usize);
    for i in 0..n {
        let s = sample_ruin_percolation(tree, env, derive_seed(seed, i), Some(max_depth))?;
        invalid += u64::from(!s.valid);
        cluster_sizes.push(s.in_cluster.iter().filter(|&&c| c).count());
        for v in 1..s.open.len() {
            table.push(vec![
                tree.parent(v).unwrap().to_string(),
                v.to_string(),
                u8::from(s.open[v]).to_string(),
                u8::from(s.in_cluster[v]).to_string(),
                i.to_string(),
            ]);
        }
    }
    Ok(Report {
        verdict: None,
        statistics: json!({ "samples": n, "invalid_samples": invalid, "max_depth": max_depth, "cluster_sizes": cluster_sizes }),
        data: Data::Table(table),
    })
}

const DEFAULT_GRID: &str = "0.05:4:0.05";
const DEFAULT_DEPTHS: &str = "8,16,32,64,128";

fn grid_and_depths(exp: &Experiment) -> Result<(Vec<f64>, Vec<u64>), CliError> {
    let grid = exp.params.gamma_grid.clone().unwrap_or(ListValue::Text(DEFAULT_GRID.into())).floats("gamma_grid")?;
    let depths = exp.params.depths.clone().unwrap_or(ListValue::Text(DEFAULT_DEPTHS.into())).integers("depths")?;
    Ok((grid, depths))
}

fn cutset_table(rows: &[goerw::tree::CutsetRow]) -> Table {
    let mut table = Table::new(&["gamma", "depth", "value"]);
    for r in rows {
        table.push(vec![f(r.gamma), r.depth.to_string(), f(r.value)]);
    }
    table
}

fn estimate_br(exp: &Experiment) -> Result<Report, CliError> {
    let family = TreeSpec::parse(required(&exp.params.tree, "tree")?)?.family()?;
    let (grid, depths) = grid_and_depths(exp)?;
    let threshold = exp.params.threshold.unwrap_or(0.1);
    let est = branching_ruin_estimate(family.as_ref(), &grid, threshold, &depths)?;
    Ok(Report {
        verdict: None,
        statistics: json!({ "family": family.name(), "estimate": est.estimate, "threshold": threshold }),
        data: Data::Table(cutset_table(&est.table)),
    })
}

fn estimate_rt(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "srw")?;
    if matches!(inp.env, EnvSpec::File(_)) || matches!(inp.tree, TreeSpec::File(_)) {
        return Err(usage("env", "estimate-rt needs a depth-indexed tree family and environment rule"));
    }
    let (grid, depths) = grid_and_depths(exp)?;
    let threshold = exp.params.threshold.unwrap_or(0.1);
    let seed = exp.seed;
    let build = |l: usize| -> Result<(Tree, Environment), EnvError> {
        let tree = inp.tree.build(Some(l)).map_err(|e| EnvError::BadDistribution(e.to_string()))?;
        let env = inp.env.build(&tree, seed).map_err(|e| EnvError::BadDistribution(e.to_string()))?;
        Ok((tree, env))
    };
    let est = rt_estimate(&build, &grid, threshold, &depths)?;
    let deepest = *depths.iter().max().unwrap() as usize;
    let (tree, env) = build(deepest)?;
    let sup = rt_hypothesis_sup(&tree, &Potentials::new(&tree, &env)?);
    Ok(Report {
        verdict: None,
        statistics: json!({ "estimate": est.estimate, "threshold": threshold, "hypothesis_sup": sup }),
        data: Data::Table(cutset_table(&est.table)),
    })
}

fn flow_check(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "srw")?;
    let tree = inp.tree.build(exp.params.depth)?;
    let env = inp.env.build(&tree, exp.seed)?;
    let gamma = exp.params.gamma.unwrap_or(1.0);
    let depths: Vec<usize> = match &exp.params.depths {
        Some(d) => d.integers("depths")?.into_iter().map(|d| d as usize).collect(),
        None => vec![tree.truncation_depth()],
    };
    let rows = flow_energy_check(&tree, &env, gamma, &depths)?;
    let mut table = Table::new(&["depth", "max_flow", "flow_value", "energy", "degenerate"]);
    for r in &rows {
        table.push(vec![r.depth.to_string(), f(r.max_flow), f(r.flow_value), f(r.energy), r.degenerate.to_string()]);
    }
    Ok(Report { verdict: None, statistics: json!({ "gamma": gamma }), data: Data::Table(table) })
}

fn phase_scan(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "alpha:point=0")?;
    let family = inp.tree.standard_family()?;
    let depth = exp.params.depth.unwrap_or(64);
    let escape = exp.params.escape_depth.or(exp.params.hit_depth).unwrap_or(depth * 3 / 4);
    let mut cfg = PhaseConfig::new(family, depth, inp.env.alpha()?.clone(), escape);
    cfg.master_seed = exp.seed;
    if let Some(t) = exp.params.trials {
        cfg.trials = t;
    }
    if let Some(h) = exp.params.horizon {
        cfg.horizon = h;
    }
    if let Some(k) = exp.params.returns {
        cfg.returns = k;
    }
    if let Some(e) = exp.params.epsilon {
        cfg.epsilon_margin = e;
    }
    if let Some(t) = exp.params.threshold {
        cfg.br_threshold = t;
    }
    if let Some(g) = &exp.params.gamma_grid {
        cfg.br_grid = g.floats("gamma_grid")?;
    }
    if let Some(d) = &exp.params.depths {
        cfg.br_depths = d.integers("depths")?;
    }
    let v = phase_diagnostic(&cfg)?;
    let mut table = Table::new(&[
        "role",
        "family",
        "trials",
        "escapes",
        "escape_frequency",
        "std_error",
        "mean_returns",
        "mean_returns_se",
        "horizon_fraction",
    ]);
    for (role, r) in [("run", &v.run), ("control", &v.control)] {
        table.push(vec![
            role.to_string(),
            r.family.clone(),
            r.trials.to_string(),
            r.escapes.to_string(),
            f(r.escape_frequency),
            f(r.std_error),
            f(r.mean_returns),
            f(r.mean_returns_se),
            f(r.horizon_fraction),
        ]);
    }
    Ok(Report {
        verdict: Some(v.verdict.to_string()),
        statistics: json!({
            "family": v.family,
            "env": v.env,
            "m": v.m,
            "br_estimate": v.br_estimate,
            "threshold": v.threshold,
            "escape_depth": v.escape_depth,
            "escape_frequency": v.run.escape_frequency,
            "control_escape_frequency": v.control.escape_frequency,
            "sigma": v.sigma,
            "margin": cfg.epsilon_margin,
        }),
        data: Data::Table(table),
    })
}

/// Exact rational value of a decimal literal such as `2`, `-0.25` or `1e-3`.
fn decimal_to_rational(key: &str, s: &str) -> Result<BigRational, CliError> {
    let bad = || usage(key, format!("bad number `{s}`"));
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    })
}

fn gambler(exp: &Experiment) -> Result<Report, CliError> {
    let mu = required(&exp.params.mu, "mu")?;
    let exact_mu: Vec<BigRational> = match mu {
        ListValue::Text(s) => s.split(',').map(|x| decimal_to_rational("mu", x.trim())).collect::<Result<_, _>>()?,
        ListValue::Numbers(v) => v
            .iter()
            .map(|&x| BigRational::from_float(x).ok_or_else(|| usage("mu", format!("bad bias {x}"))))
            .collect::<Result<_, _>>()?,
    };
    // one entry per state 1..=N; the entry of the absorbing state N only fixes N
    let n = exact_mu.len();
    if n < 2 {
        return Err(usage("mu", "give biases for states 1..N with N ≥ 2"));
    }
    let biases = exact_mu[..n - 1].to_vec();
    let floats: Vec<f64> = mu.floats("mu")?[..n - 1].to_vec();
    let start = exp.params.start.unwrap_or(1);
    let chain = GamblerChain::new(floats, start)?;
    let rational = gambler_ruin_rational(&biases, start)?;
    let exact = gambler_ruin_exact(&chain);
    let mut header = vec!["n", "start", "ruin_exact", "ruin"];
    let mut row = vec![n.to_string(), start.to_string(), rational.to_string(), f(exact)];
    let mut stats = json!({ "n": n, "start": start, "ruin_exact": rational.to_string(), "ruin": exact });
    if let Some(trials) = exp.params.trials {
        let (est, se) = gambler_ruin_mc(&chain, trials, exp.seed)?;
        header.extend(["mc_estimate", "mc_std_error"]);
        row.extend([f(est), f(se)]);
        stats["mc_estimate"] = json!(est);
        stats["mc_std_error"] = json!(se);
    }
    let mut table = Table::new(&header);
    table.push(row);
    Ok(Report { verdict: None, statistics: stats, data: Data::Table(table) })
}

fn concentration(exp: &Experiment) -> Result<Report, CliError> {
    let inp = inputs(exp, "alpha:a1=0,a2=2,p=0.5")?;
    let dist = inp.env.alpha()?;
    let depths: Vec<usize> = exp
        .params
        .depths
        .clone()
        .unwrap_or(ListValue::Text(DEFAULT_DEPTHS.into()))
        .integers("depths")?
        .into_iter()
        .map(|d| d as usize)
        .collect();
    let deepest = *depths.iter().max().ok_or_else(|| usage("depths", "empty"))?;
    let tree = inp.tree.build(Some(exp.params.depth.unwrap_or(deepest)))?;
    let epsilon = exp.params.epsilon.unwrap_or(0.3);
    let samples = exp.params.trials.unwrap_or(1000);
    let t = concentration_experiment(&tree, dist, epsilon, &depths, samples, exp.seed)?;
    let mut table = Table::new(&["depth", "failures", "samples", "frequency", "std_error"]);
    for r in &t.rows {
        table.push(vec![
            r.depth.to_string(),
            r.failures.to_string(),
            r.samples.to_string(),
            f(r.frequency),
            f(r.std_error),
        ]);
    }
    Ok(Report {
        verdict: None,
        statistics: json!({
            "epsilon": epsilon,
            "m": t.m,
            "nonincreasing_within_2se": t.nonincreasing_after(0, 2.0),
        }),
        data: Data::Table(table),
    })
}
