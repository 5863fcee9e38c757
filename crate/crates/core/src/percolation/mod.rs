//! Ruin percolation: an edge `(v⁻¹, v)` is open when the extension `X^(v)`
//! reaches `v` before returning to the root. All extensions of one sample
//! read the same [`ClockTable`].

mod concentration;

pub use concentration::{
    concentration_event, concentration_experiment, ConcentrationEvent, ConcentrationRow, ConcentrationTable,
};

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{rt_hypothesis_sup, EnvError, Environment, Potentials};
use crate::seed::derive_seed;
use crate::stats::Proportion;
use crate::tree::Tree;
use crate::walk::{extension_hits_target, ClockTable, ExtensionOutcome, WalkError, DEFAULT_HARD_CAP};

/// Smallest trial count accepted by the Monte Carlo estimators.
pub const MIN_TRIALS: u64 = 100;
/// Conditioning hits required by [`quasi_independence_statistic`].
pub const MIN_CONDITIONING_HITS: u64 = 50;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PercolationError {
    #[error("at least {MIN_TRIALS} trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("vertex {0} is not the lower end of an edge")]
    NotAnEdge(usize),
    #[error("psi = 1 on edge into {0} below depth one: conductance is infinite")]
    InfiniteConductance(usize),
    #[error("conditioning event occurred {hits} times in {trials} trials, need {MIN_CONDITIONING_HITS}")]
    RareConditioning { hits: u64, trials: u64 },
    #[error("every trial hit the step cap")]
    AllInvalid,
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Open/closed status of every edge up to a depth, for one clock table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PercolationSample {
    pub seed: u64,
    /// `open[v]` for the edge into `v`; entry 0 is unused.
    pub open: Vec<bool>,
    pub in_cluster: Vec<bool>,
    /// False when some extension hit the step cap.
    pub valid: bool,
}

impl PercolationSample {
    pub fn num_edges(&self) -> usize {
        self.open.len() - 1
    }

    /// Every edge in the cluster has its parent edge in the cluster too.
    pub fn is_upward_closed(&self, tree: &Tree) -> bool {
        (1..self.open.len()).all(|v| {
            let p = tree.parent(v).unwrap();
            !self.in_cluster[v] || (self.open[v] && (p == 0 || self.in_cluster[p]))
        })
    }
}

/// Whether the edge into `v` is open on `clocks`.
pub fn edge_is_open(
    tree: &Tree,
    env: &Environment,
    clocks: ClockTable,
    v: usize,
    cap: u64,
) -> Result<Option<bool>, WalkError> {
    if tree.depth(v) == 1 {
        return Ok(Some(true));
    }
    Ok(match extension_hits_target(tree, env, clocks, v, cap)? {
        ExtensionOutcome::Hit => Some(true),
        ExtensionOutcome::Returned => Some(false),
        ExtensionOutcome::Capped => None,
    })
}

/// One percolation sample on edges of depth at most `max_depth` (default: the truncation depth).
pub fn sample_ruin_percolation(
    tree: &Tree,
    env: &Environment,
    seed: u64,
    max_depth: Option<usize>,
) -> Result<PercolationSample, PercolationError> {
    env.check_tree(tree)?;
    let depth = max_depth.unwrap_or(tree.truncation_depth()).min(tree.truncation_depth());
    let n = tree.level(depth).end;
    let clocks = ClockTable::new(seed);
    let mut open = vec![false; n];
    let mut in_cluster = vec![false; n];
    let mut valid = true;
    for v in 1..n {
        match edge_is_open(tree, env, clocks, v, DEFAULT_HARD_CAP)? {
            Some(o) => open[v] = o,
            None => valid = false,
        }
        let p = tree.parent(v).unwrap();
        in_cluster[v] = open[v] && (p == 0 || in_cluster[p]);
    }
    Ok(PercolationSample { seed, open, in_cluster, valid })
}

/// Monte Carlo estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConnectionEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub valid_trials: u64,
    pub invalid_trials: u64,
}

impl ConnectionEstimate {
    pub fn proportion(&self) -> Proportion {
        Proportion::new((self.estimate * self.valid_trials as f64).round() as u64, self.valid_trials)
    }
}

/// Root-cluster membership of the edge into `e` for one clock table;
/// `None` when an extension hit the cap. Closed edges short-circuit.
fn connected(
    tree: &Tree,
    env: &Environment,
    clocks: ClockTable,
    e: usize,
    cache: &mut HashMap<usize, Option<bool>>,
) -> Result<Option<bool>, WalkError> {
    for g in tree.path_from_root(e).into_iter().skip(1) {
        let status = match cache.get(&g) {
            Some(s) => *s,
            None => {
                let s = edge_is_open(tree, env, clocks, g, DEFAULT_HARD_CAP)?;
                cache.insert(g, s);
                s
            }
        };
        match status {
            Some(true) => {}
            other => return Ok(other),
        }
    }
    Ok(Some(true))
}

/// Estimate of `P(ρ ↔ e⁺)`, the probability that every edge `g ≤ e` is open.
pub fn edge_connection_probability_mc(
    tree: &Tree,
    env: &Environment,
    e: usize,
    trials: u64,
    master_seed: u64,
) -> Result<ConnectionEstimate, PercolationError> {
    env.check_tree(tree)?;
    if e == 0 || !tree.contains(e) {
        return Err(PercolationError::NotAnEdge(e));
    }
    if trials < MIN_TRIALS {
        return Err(PercolationError::TooFewTrials(trials));
    }
    let outcomes: Vec<Option<bool>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let clocks = ClockTable::new(derive_seed(master_seed, i));
            connected(tree, env, clocks, e, &mut HashMap::new())
        })
        .collect::<Result<_, _>>()?;
    let valid = outcomes.iter().filter(|o| o.is_some()).count() as u64;
    if valid == 0 {
        return Err(PercolationError::AllInvalid);
    }
    let hits = outcomes.iter().filter(|o| **o == Some(true)).count() as u64;
    let p = Proportion::new(hits, valid);
    Ok(ConnectionEstimate {
        estimate: p.estimate(),
        std_error: p.std_error(),
        valid_trials: valid,
        invalid_trials: trials - valid,
    })
}

/// Adapted conductance `c(e)`.
pub fn adapted_conductance(tree: &Tree, pot: &Potentials, e: usize) -> Result<f64, PercolationError> {
    if e == 0 || !tree.contains(e) {
        return Err(PercolationError::NotAnEdge(e));
    }
    pot.conductance(tree, e).ok_or(PercolationError::InfiniteConductance(e))
}

/// `K = 2 + sup R(v⁻¹,v)/φ(v⁻¹)` and `M = (1+K)²·e^{2K}`.
pub fn quasi_independence_constant(tree: &Tree, pot: &Potentials) -> (f64, f64) {
    let k = 2.0 + rt_hypothesis_sup(tree, pot);
    (k, (1.0 + k).powi(2) * (2.0 * k).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuasiIndependence {
    pub e1: usize,
    pub e2: usize,
    /// Last common edge of the two root paths; `None` when they meet only at the root.
    pub common_edge: Option<usize>,
    pub trials: u64,
    pub invalid_trials: u64,
    pub conditioning_hits: u64,
    /// `P(e1, e2 ∈ C | e ∈ C)`.
    pub joint: f64,
    pub joint_se: f64,
    pub p1: f64,
    pub p2: f64,
    pub product: f64,
    /// `joint / product` with a delta-method standard error.
    pub ratio: f64,
    pub ratio_se: f64,
    pub k: f64,
    pub m_bound: f64,
    /// `joint ≤ M·product + 3·joint_se`.
    pub holds: bool,
}

/// Conditional joint and product connection probabilities of two edges.
pub fn quasi_independence_statistic(
    tree: &Tree,
    env: &Environment,
    e1: usize,
    e2: usize,
    trials: u64,
    master_seed: u64,
) -> Result<QuasiIndependence, PercolationError> {
    env.check_tree(tree)?;
    for e in [e1, e2] {
        if e == 0 || !tree.contains(e) {
            return Err(PercolationError::NotAnEdge(e));
        }
    }
    if trials < MIN_TRIALS {
        return Err(PercolationError::TooFewTrials(trials));
    }
    let pot = Potentials::new(tree, env)?;
    let (k, m_bound) = quasi_independence_constant(tree, &pot);
    let top = tree.common_ancestor(e1, e2);
    let common_edge = (top != 0).then_some(top);
    let outcomes: Vec<Option<(bool, bool, bool)>> = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<_, WalkError> {
            let clocks = ClockTable::new(derive_seed(master_seed, i));
            let mut cache = HashMap::new();
            let base = match common_edge {
                Some(e) => connected(tree, env, clocks, e, &mut cache)?,
                None => Some(true),
            };
            let Some(base) = base else { return Ok(None) };
            if !base {
                return Ok(Some((false, false, false)));
            }
            let a = connected(tree, env, clocks, e1, &mut cache)?;
            let b = connected(tree, env, clocks, e2, &mut cache)?;
            Ok(a.zip(b).map(|(a, b)| (true, a, b)))
        })
        .collect::<Result<_, _>>()?;
    let valid: Vec<(bool, bool, bool)> = outcomes.iter().flatten().copied().collect();
    let invalid_trials = trials - valid.len() as u64;
    let cond: Vec<(bool, bool)> = valid.iter().filter(|o| o.0).map(|o| (o.1, o.2)).collect();
    let hits = cond.len() as u64;
    if hits < MIN_CONDITIONING_HITS {
        return Err(PercolationError::RareConditioning { hits, trials });
    }
    let n = hits as f64;
    let count = |f: &dyn Fn(&(bool, bool)) -> bool| cond.iter().filter(|o| f(o)).count() as f64;
    let n11 = count(&|o| o.0 && o.1);
    let n1 = count(&|o| o.0);
    let n2 = count(&|o| o.1);
    let (joint, p1, p2) = (n11 / n, n1 / n, n2 / n);
    let product = p1 * p2;
    let joint_se = (joint * (1.0 - joint) / n).sqrt();
    let (ratio, ratio_se) = if product > 0.0 {
        let r = joint / product;
        // influence function of joint/(p1·p2) evaluated on the four cells
        let infl = |a: f64, b: f64| (a * b - joint) / product - r * (a - p1) / p1 - r * (b - p2) / p2;
        let n10 = n1 - n11;
        let n01 = n2 - n11;
        let n00 = n - n11 - n10 - n01;
        let var = (n11 * infl(1.0, 1.0).powi(2)
            + n10 * infl(1.0, 0.0).powi(2)
            + n01 * infl(0.0, 1.0).powi(2)
            + n00 * infl(0.0, 0.0).powi(2))
            / n;
        (r, (var / n).sqrt())
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(QuasiIndependence {
        e1,
        e2,
        common_edge,
        trials,
        invalid_trials,
        conditioning_hits: hits,
        joint,
        joint_se,
        p1,
        p2,
        product,
        ratio,
        ratio_se,
        k,
        m_bound,
        holds: joint <= m_bound * product + 3.0 * joint_se,
    })
}
