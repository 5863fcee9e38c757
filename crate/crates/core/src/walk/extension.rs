use super::rubin::{first_visit_choice, relative_rate, ClockSum};
use super::{check, drive, ClockTable, StopRule, WalkError, WalkTrajectory};
use crate::environment::Environment;
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, Default)]
struct PathNode {
    visited: bool,
    // offsets of the (parent, on-path child) clock sums
    offsets: [u64; 2],
    race: Option<[ClockSum; 2]>,
}

/// The extension `X^(v)` of the clock-driven walk on the root path `P_v`.
///
/// At a fresh vertex `u` of the path other than `v` the full-neighbourhood
/// first-visit choice is computed; if it names the parent or the on-path
/// child the process follows it, otherwise it falls through to a comparison
/// of the two on-path μ clocks. Later visits compare running μ clock sums of
/// the two on-path neighbours. At `v` the process steps back to `v⁻¹`.
///
/// Clock sums start at index `C + 1` where `C` is the number of crossings of
/// the edge made by the first step: 1 for the neighbour chosen by the
/// first-visit argmin, 0 for every other one. When the first-visit argmin
/// leaves the path, both on-path sums therefore start at index 1. With these
/// offsets the process agrees step for step with the restriction of the walk
/// to `P_v` on shared clocks.
pub struct ExtensionWalker<'a> {
    tree: &'a Tree,
    env: &'a Environment,
    clocks: ClockTable,
    path: Vec<usize>,
    nodes: Vec<PathNode>,
}

impl<'a> ExtensionWalker<'a> {
    pub fn new(tree: &'a Tree, env: &'a Environment, clocks: ClockTable, target: usize) -> Result<Self, WalkError> {
        if !tree.contains(target) {
            return Err(WalkError::NoSuchVertex(target));
        }
        if target == 0 {
            return Err(WalkError::RootTarget);
        }
        let path = tree.path_from_root(target);
        let nodes = vec![PathNode::default(); path.len()];
        Ok(ExtensionWalker { tree, env, clocks, path, nodes })
    }

    pub fn target(&self) -> usize {
        *self.path.last().unwrap()
    }

    pub fn path(&self) -> &[usize] {
        &self.path
    }

    /// Next position from `pos`, which must lie on the path.
    pub fn step(&mut self, pos: usize) -> usize {
        let (tree, env, clocks) = (self.tree, self.env, &self.clocks);
        let i = tree.depth(pos);
        debug_assert_eq!(self.path[i], pos);
        let k = self.path.len() - 1;
        if i == k {
            return self.path[k - 1];
        }
        if i == 0 {
            return self.path[1];
        }
        let (up, down) = (self.path[i - 1], self.path[i + 1]);
        let node = &mut self.nodes[i];
        if !node.visited {
            node.visited = true;
            let w = first_visit_choice(tree, env, clocks, pos);
            if w == up {
                node.offsets = [1, 0];
                return up;
            }
            if w == down {
                node.offsets = [0, 1];
                return down;
            }
            node.offsets = [0, 0];
        }
        let rate_up = relative_rate(tree, env, pos, up, true);
        let offsets = node.offsets;
        let race = node.race.get_or_insert_with(|| {
            [ClockSum::start(clocks, pos, up, offsets[0], rate_up), ClockSum::start(clocks, pos, down, offsets[1], 1.0)]
        });
        if race[1].sum < race[0].sum {
            race[1].advance(clocks, pos, down, 1.0);
            down
        } else {
            race[0].advance(clocks, pos, up, rate_up);
            up
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtensionOutcome {
    /// `τ_v(v) < τ_ρ⁺(v)`.
    Hit,
    Returned,
    /// The step cap was reached first.
    Capped,
}

/// Whether `X^(v)` reaches `v` before returning to the root.
pub fn extension_hits_target(
    tree: &Tree,
    env: &Environment,
    clocks: ClockTable,
    target: usize,
    cap: u64,
) -> Result<ExtensionOutcome, WalkError> {
    let mut walker = ExtensionWalker::new(tree, env, clocks, target)?;
    let mut pos = 0;
    for _ in 0..cap {
        pos = walker.step(pos);
        if pos == target {
            return Ok(ExtensionOutcome::Hit);
        }
        if pos == 0 {
            return Ok(ExtensionOutcome::Returned);
        }
    }
    Ok(ExtensionOutcome::Capped)
}

/// Trajectory of `X^(v)` under `stop`; the truncation depth plays no role.
pub fn simulate_extension(
    tree: &Tree,
    env: &Environment,
    target: usize,
    clocks: ClockTable,
    stop: &StopRule,
) -> Result<WalkTrajectory, WalkError> {
    check(tree, env)?;
    let mut walker = ExtensionWalker::new(tree, env, clocks, target)?;
    let mut positions = vec![0usize];
    let summary = drive(tree, stop, false, |v, _| walker.step(v), |x| positions.push(x));
    Ok(WalkTrajectory::from_positions(tree, positions, summary))
}
