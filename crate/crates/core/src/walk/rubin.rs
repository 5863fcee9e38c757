use std::collections::HashMap;

use super::{check, drive, ClockTable, StopRule, WalkError, WalkTrajectory};
use crate::environment::Environment;
use crate::tree::Tree;

/// Relative rate of the step `v → w` in the λ regime (`mu = false`) or the μ regime.
#[inline]
pub(crate) fn relative_rate(tree: &Tree, env: &Environment, v: usize, w: usize, mu: bool) -> f64 {
    if tree.parent(v) == Some(w) {
        if mu {
            env.mu(v)
        } else {
            env.lambda(v)
        }
    } else {
        1.0
    }
}

/// First-visit choice: the neighbour minimising `ξ(v, w, 0)/r_λ(v, w)`,
/// lowest id on ties.
pub(crate) fn first_visit_choice(tree: &Tree, env: &Environment, clocks: &ClockTable, v: usize) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for w in tree.neighbors(v) {
        let key = clocks.xi(v, w, 0) / relative_rate(tree, env, v, w, false);
        if key < best.0 {
            best = (key, w);
        }
    }
    best.1
}

/// Running clock sum of one oriented edge in the μ regime.
///
/// With offset `o` the sum starts at `ξ(v,w,o+1)/r_μ` and each departure to
/// `w` adds the next variate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ClockSum {
    pub(crate) sum: f64,
    next: u64,
}

impl ClockSum {
    #[inline]
    pub(crate) fn start(clocks: &ClockTable, v: usize, w: usize, offset: u64, rate: f64) -> ClockSum {
        ClockSum { sum: clocks.xi(v, w, offset + 1) / rate, next: offset + 1 }
    }

    #[inline]
    pub(crate) fn advance(&mut self, clocks: &ClockTable, v: usize, w: usize, rate: f64) {
        self.next += 1;
        self.sum += clocks.xi(v, w, self.next) / rate;
    }
}

/// Rubin's construction of the walk on a fixed [`ClockTable`].
pub struct RubinWalker<'a> {
    tree: &'a Tree,
    env: &'a Environment,
    clocks: ClockTable,
    first_choice: HashMap<usize, usize>,
    races: HashMap<usize, Vec<(usize, ClockSum)>>,
}

impl<'a> RubinWalker<'a> {
    pub fn new(tree: &'a Tree, env: &'a Environment, clocks: ClockTable) -> Self {
        RubinWalker { tree, env, clocks, first_choice: HashMap::new(), races: HashMap::new() }
    }

    /// Next position from `v` given `Z_n(v)`.
    pub fn step(&mut self, v: usize, visit_count: u64) -> usize {
        let (tree, env, clocks) = (self.tree, self.env, &self.clocks);
        if visit_count <= 1 {
            let w = first_visit_choice(tree, env, clocks, v);
            self.first_choice.insert(v, w);
            return w;
        }
        let first = self.first_choice[&v];
        let race = self.races.entry(v).or_insert_with(|| {
            tree.neighbors(v)
                .map(|w| {
                    let offset = u64::from(w == first);
                    (w, ClockSum::start(clocks, v, w, offset, relative_rate(tree, env, v, w, true)))
                })
                .collect()
        });
        let mut best = 0;
        for i in 1..race.len() {
            if race[i].1.sum < race[best].1.sum {
                best = i;
            }
        }
        let w = race[best].0;
        race[best].1.advance(clocks, v, w, relative_rate(tree, env, v, w, true));
        w
    }
}

/// Trajectory of the walk driven by the clocks; deterministic given `clocks`.
pub fn simulate_rubin(
    tree: &Tree,
    env: &Environment,
    clocks: ClockTable,
    stop: &StopRule,
) -> Result<WalkTrajectory, WalkError> {
    check(tree, env)?;
    let mut walker = RubinWalker::new(tree, env, clocks);
    let mut positions = vec![0usize];
    let summary = drive(tree, stop, true, |v, z| walker.step(v, z), |x| positions.push(x));
    Ok(WalkTrajectory::from_positions(tree, positions, summary))
}
