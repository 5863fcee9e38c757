use serde::Serialize;

use super::AnalysisError;
use crate::environment::{Environment, Potentials};
use crate::tree::{EdgeWeighting, Tree};

/// A flow from the root to the vertices at depth `depth`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxFlow {
    pub depth: usize,
    /// Maximum flow value under the capacities.
    pub max_flow: f64,
    /// `θ(v)` on the edge into `v` for every vertex of depth `1..=depth`.
    pub theta: Vec<f64>,
}

impl MaxFlow {
    /// Total flow leaving the root.
    pub fn value(&self, tree: &Tree) -> f64 {
        tree.children(0).map(|c| self.theta[c]).sum()
    }

    /// Largest relative violation of conservation at internal vertices.
    pub fn conservation_error(&self, tree: &Tree) -> f64 {
        let mut worst: f64 = 0.0;
        for v in 1..self.theta.len() {
            if tree.depth(v) >= self.depth || self.theta[v] == 0.0 {
                continue;
            }
            let out: f64 = tree.children(v).map(|c| self.theta[c]).sum();
            worst = worst.max((out - self.theta[v]).abs() / self.theta[v]);
        }
        worst
    }
}

/// Max flow from the root to depth `depth` with the given edge capacities,
/// scaled to total `min(1, max flow)`.
///
/// The maximum is computed bottom-up as `F(v) = min(cap(v), Σ F(children))`;
/// the flow is then split top-down in proportion to the children's `F`, so
/// no edge carries more than its capacity.
pub fn tree_max_flow(tree: &Tree, caps: &EdgeWeighting, depth: usize) -> Result<MaxFlow, AnalysisError> {
    if depth == 0 {
        return Err(AnalysisError::Tree(crate::tree::TreeError::ZeroDepth));
    }
    if depth > tree.truncation_depth() {
        return Err(AnalysisError::DepthTooLarge { depth, max: tree.truncation_depth() });
    }
    let n = tree.level(depth).end;
    let mut f = vec![0.0f64; n];
    for v in (1..n).rev() {
        f[v] = if tree.depth(v) == depth { caps.get(v) } else { caps.get(v).min(tree.children(v).map(|c| f[c]).sum()) };
    }
    let max_flow: f64 = tree.children(0).map(|c| f[c]).sum();
    let mut theta = vec![0.0f64; n];
    if max_flow > 0.0 {
        let total = max_flow.min(1.0);
        for c in tree.children(0) {
            theta[c] = total * (f[c] / max_flow);
        }
        for v in 1..n {
            if tree.depth(v) == depth || theta[v] == 0.0 {
                continue;
            }
            let below: f64 = tree.children(v).map(|c| f[c]).sum();
            for c in tree.children(v) {
                theta[c] = theta[v] * (f[c] / below);
            }
        }
    }
    Ok(MaxFlow { depth, max_flow, theta })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowRow {
    pub depth: usize,
    pub max_flow: f64,
    pub flow_value: f64,
    /// `Σ θ(e)²/c(e)`.
    pub energy: f64,
    pub degenerate: bool,
}

/// Max flows with capacities `Ψ(e)^γ` and their energies under the adapted
/// conductances, one row per truncation depth.
pub fn flow_energy_check(
    tree: &Tree,
    env: &Environment,
    gamma: f64,
    depths: &[usize],
) -> Result<Vec<FlowRow>, AnalysisError> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(AnalysisError::BadGamma(gamma));
    }
    let pot = Potentials::new(tree, env)?;
    let caps = pot.ruin_weights(tree, gamma);
    depths
        .iter()
        .map(|&depth| {
            let flow = tree_max_flow(tree, &caps, depth)?;
            let mut energy = 0.0;
            for v in 1..flow.theta.len() {
                let t = flow.theta[v];
                if t == 0.0 {
                    continue;
                }
                energy += match pot.conductance(tree, v) {
                    Some(c) => t * t / c,
                    None => f64::INFINITY,
                };
            }
            let flow_value = flow.value(tree);
            Ok(FlowRow {
                depth,
                max_flow: flow.max_flow,
                flow_value,
                energy,
                degenerate: flow.max_flow.is_nan() || flow.max_flow <= 0.0 || !energy.is_finite(),
            })
        })
        .collect()
}
