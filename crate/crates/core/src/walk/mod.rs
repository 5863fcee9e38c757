//! The once-excited walk: direct sampling from the transition law, Rubin's
//! clock construction, and the coupled extension processes.

mod clock;
mod extension;
mod restriction;
mod rubin;

pub use clock::ClockTable;
pub use extension::{extension_hits_target, simulate_extension, ExtensionOutcome, ExtensionWalker};
pub use restriction::{restriction, Restriction};
pub use rubin::{simulate_rubin, RubinWalker};

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::environment::{EnvError, Environment};
use crate::tree::Tree;

/// Default bound on the number of steps of any single run.
pub const DEFAULT_HARD_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("the extension target must differ from the root")]
    RootTarget,
    #[error("vertex {0} is not in the tree")]
    NoSuchVertex(usize),
    #[error("restriction set must contain the root")]
    SetWithoutRoot,
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// When to stop a walk: the first rule to trigger wins.
///
/// Reaching the truncation depth always stops the walk and counts as escape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StopRule {
    pub max_steps: Option<u64>,
    /// Stop at the k-th return to the root.
    pub returns_to_root: Option<u64>,
    pub hit_depth: Option<usize>,
    pub hard_cap: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule { max_steps: None, returns_to_root: None, hit_depth: None, hard_cap: DEFAULT_HARD_CAP }
    }
}

impl StopRule {
    pub fn max_steps(n: u64) -> Self {
        StopRule { max_steps: Some(n), ..Default::default() }
    }

    pub fn return_to_root() -> Self {
        StopRule { returns_to_root: Some(1), ..Default::default() }
    }

    pub fn hit_depth(d: usize) -> Self {
        StopRule { hit_depth: Some(d), ..Default::default() }
    }

    pub fn or_max_steps(mut self, n: u64) -> Self {
        self.max_steps = Some(n);
        self
    }

    pub fn or_returns(mut self, k: u64) -> Self {
        self.returns_to_root = Some(k);
        self
    }

    pub fn or_hit_depth(mut self, d: usize) -> Self {
        self.hit_depth = Some(d);
        self
    }

    pub fn with_hard_cap(mut self, cap: u64) -> Self {
        self.hard_cap = cap;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxSteps,
    ReturnedToRoot,
    HitDepth,
    /// Reached the truncation depth.
    Escaped,
    /// Hit the hard cap before any rule triggered.
    Truncated,
}

/// Per-run statistics that do not need the full path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WalkSummary {
    pub steps: u64,
    pub returns_to_root: u64,
    pub max_depth: usize,
    pub reason: StopReason,
}

impl WalkSummary {
    pub fn escaped(&self) -> bool {
        self.reason == StopReason::Escaped
    }

    pub fn truncated(&self) -> bool {
        self.reason == StopReason::Truncated
    }
}

/// Runs a walk given a step function `next(position, Z_n(position))`.
pub(crate) fn drive(
    tree: &Tree,
    stop: &StopRule,
    escape_at_truncation: bool,
    mut next: impl FnMut(usize, u64) -> usize,
    mut record: impl FnMut(usize),
) -> WalkSummary {
    let mut visits = vec![0u32; tree.len()];
    let (mut pos, mut steps, mut returns, mut max_depth) = (0usize, 0u64, 0u64, 0usize);
    visits[0] = 1;
    let reason = loop {
        let depth = tree.depth(pos);
        if stop.hit_depth.is_some_and(|d| depth >= d) {
            break StopReason::HitDepth;
        }
        if escape_at_truncation && steps > 0 && tree.is_truncation_leaf(pos) {
            break StopReason::Escaped;
        }
        if stop.returns_to_root.is_some_and(|k| returns >= k) {
            break StopReason::ReturnedToRoot;
        }
        if stop.max_steps.is_some_and(|n| steps >= n) {
            break StopReason::MaxSteps;
        }
        if steps >= stop.hard_cap {
            break StopReason::Truncated;
        }
        pos = next(pos, visits[pos] as u64);
        steps += 1;
        visits[pos] = visits[pos].saturating_add(1);
        returns += u64::from(pos == 0);
        max_depth = max_depth.max(tree.depth(pos));
        record(pos);
    };
    WalkSummary { steps, returns_to_root: returns, max_depth, reason }
}

/// A sampled path with its local times.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkTrajectory {
    positions: Vec<usize>,
    visits: HashMap<usize, u64>,
    crossings: HashMap<(usize, usize), u64>,
    first_hit: HashMap<usize, usize>,
    first_return: Option<usize>,
    summary: WalkSummary,
}

impl WalkTrajectory {
    pub(crate) fn from_positions(tree: &Tree, positions: Vec<usize>, summary: WalkSummary) -> WalkTrajectory {
        let mut visits = HashMap::new();
        let mut crossings = HashMap::new();
        let mut first_hit = HashMap::new();
        for (k, &x) in positions.iter().enumerate() {
            *visits.entry(x).or_insert(0) += 1;
            first_hit.entry(x).or_insert(k);
            if k > 0 {
                *crossings.entry((positions[k - 1], x)).or_insert(0) += 1;
            }
        }
        let first_return = positions.iter().skip(1).position(|&x| x == 0).map(|k| k + 1);
        debug_assert!(positions.windows(2).all(|w| tree.are_adjacent(w[0], w[1])));
        WalkTrajectory { positions, visits, crossings, first_hit, first_return, summary }
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn steps(&self) -> usize {
        self.positions.len() - 1
    }

    /// `Z_n(x)` at the final time.
    pub fn visit_count(&self, x: usize) -> u64 {
        self.visits.get(&x).copied().unwrap_or(0)
    }

    /// `C_n(v, u)`, the number of jumps from `v` to `u`.
    pub fn crossings(&self, v: usize, u: usize) -> u64 {
        self.crossings.get(&(v, u)).copied().unwrap_or(0)
    }

    /// `τ_x`, the first time at `x`.
    pub fn first_hit(&self, x: usize) -> Option<usize> {
        self.first_hit.get(&x).copied()
    }

    /// `τ_ρ⁺`, the first time at the root after time 0.
    pub fn first_return(&self) -> Option<usize> {
        self.first_return
    }

    pub fn summary(&self) -> &WalkSummary {
        &self.summary
    }

    pub fn escaped(&self) -> bool {
        self.summary.escaped()
    }

    pub fn truncated(&self) -> bool {
        self.summary.truncated()
    }

    /// Checks adjacency of consecutive positions and recomputes `Z` and `C`.
    pub fn is_consistent(&self, tree: &Tree) -> bool {
        let again = WalkTrajectory::from_positions(tree, self.positions.clone(), self.summary);
        self.positions.first() == Some(&0)
            && self.positions.windows(2).all(|w| tree.are_adjacent(w[0], w[1]))
            && again == *self
            && self.visits.values().sum::<u64>() == self.positions.len() as u64
            && self.crossings.values().sum::<u64>() == self.steps() as u64
    }
}

/// Neighbours of `v` and their probabilities under the transition law when
/// `Z_n(v) = visit_count`.
pub fn transition_probabilities(tree: &Tree, env: &Environment, v: usize, visit_count: u64) -> Vec<(usize, f64)> {
    let kids = tree.num_children(v) as f64;
    if v == 0 {
        return tree.children(0).map(|c| (c, 1.0 / kids)).collect();
    }
    let bias = if visit_count <= 1 { env.lambda(v) } else { env.mu(v) };
    let total = bias + kids;
    let mut out = vec![(tree.parent(v).unwrap(), bias / total)];
    out.extend(tree.children(v).map(|c| (c, 1.0 / total)));
    out
}

/// One step from `v` given `Z_n(v) = visit_count`: uniform at the root; else
/// the parent with weight `λ_v` on a first visit (`μ_v` later) and each child
/// with weight 1.
pub fn step_direct<R: Rng + ?Sized>(tree: &Tree, env: &Environment, v: usize, visit_count: u64, rng: &mut R) -> usize {
    let kids = tree.children(v);
    if v == 0 {
        return kids.start + rng.random_range(0..kids.len());
    }
    let bias = if visit_count <= 1 { env.lambda(v) } else { env.mu(v) };
    let u = rng.random::<f64>() * (bias + kids.len() as f64);
    if u < bias || kids.is_empty() {
        tree.parent(v).unwrap()
    } else {
        kids.start + ((u - bias) as usize).min(kids.len() - 1)
    }
}

fn check(tree: &Tree, env: &Environment) -> Result<(), WalkError> {
    env.check_tree(tree)?;
    Ok(())
}

/// Samples a trajectory from the transition law.
pub fn simulate(tree: &Tree, env: &Environment, stop: &StopRule, seed: u64) -> Result<WalkTrajectory, WalkError> {
    check(tree, env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions = vec![0usize];
    let summary = drive(tree, stop, true, |v, z| step_direct(tree, env, v, z, &mut rng), |x| positions.push(x));
    Ok(WalkTrajectory::from_positions(tree, positions, summary))
}

/// Like [`simulate`] but keeps only the summary.
pub fn simulate_summary(tree: &Tree, env: &Environment, stop: &StopRule, seed: u64) -> Result<WalkSummary, WalkError> {
    check(tree, env)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(drive(tree, stop, true, |v, z| step_direct(tree, env, v, z, &mut rng), |_| {}))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_path, build_regular};

    #[test]
    fn zero_steps() {
        let t = build_path(3).unwrap();
        let tr = simulate(&t, &Environment::simple(&t), &StopRule::max_steps(0), 1).unwrap();
        assert_eq!(tr.positions(), &[0]);
        assert_eq!(tr.summary().reason, StopReason::MaxSteps);
    }

    #[test]
    fn law_examples() {
        let t = build_regular(3, 3).unwrap();
        let root = transition_probabilities(&t, &Environment::simple(&t), 0, 1);
        assert_eq!(root, vec![(1, 1.0 / 3.0), (2, 1.0 / 3.0), (3, 1.0 / 3.0)]);
        let env = Environment::constant(&t, 3.0, 1.0).unwrap();
        let first = transition_probabilities(&t, &env, 1, 1);
        assert_eq!(first.iter().map(|p| p.1).collect::<Vec<_>>(), vec![0.6, 0.2, 0.2]);
        let later = transition_probabilities(&t, &env, 1, 2);
        assert!(later.iter().all(|p| (p.1 - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn trajectories_are_consistent() {
        let t = build_regular(3, 6).unwrap();
        let env = Environment::constant(&t, 2.0, 0.7).unwrap();
        for seed in 0..20 {
            let tr = simulate(&t, &env, &StopRule::max_steps(500), seed).unwrap();
            assert!(tr.is_consistent(&t));
            assert_eq!(tr.visit_count(0) - 1, tr.summary().returns_to_root);
        }
    }

    #[test]
    fn escape_at_truncation() {
        let t = build_path(2).unwrap();
        let tr = simulate(&t, &Environment::simple(&t), &StopRule::default(), 3).unwrap();
        assert_eq!(*tr.positions().last().unwrap(), 2);
        assert!(tr.escaped());
    }

    #[test]
    fn hard_cap_flags_truncation() {
        let t = build_path(50).unwrap();
        let env = Environment::constant(&t, 5.0, 5.0).unwrap();
        let s = simulate_summary(&t, &env, &StopRule::default().with_hard_cap(100), 0).unwrap();
        assert!(s.truncated());
        assert_eq!(s.steps, 100);
    }
}
