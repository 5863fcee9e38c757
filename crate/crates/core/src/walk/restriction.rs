use std::collections::HashSet;

use super::{WalkError, WalkTrajectory};

/// The trace of a walk on a vertex set `B`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    /// Positions `X_{m_0}, X_{m_1}, …` at the successive times the walk is in
    /// `B` at a vertex other than the previous one.
    pub positions: Vec<usize>,
    /// Number of moves `K_B` of the restricted walk within the observed trajectory.
    pub killing_time: usize,
}

/// Restriction of `trajectory` to `set`, which must contain the root.
pub fn restriction(trajectory: &WalkTrajectory, set: &[usize]) -> Result<Restriction, WalkError> {
    let set: HashSet<usize> = set.iter().copied().collect();
    if !set.contains(&0) {
        return Err(WalkError::SetWithoutRoot);
    }
    let mut positions: Vec<usize> = Vec::new();
    for &x in trajectory.positions() {
        if set.contains(&x) && positions.last() != Some(&x) {
            positions.push(x);
        }
    }
    let killing_time = positions.len() - 1;
    Ok(Restriction { positions, killing_time })
}
