//! Spherically symmetric trees described only by their level sizes.
//!
//! For such trees and weights that are constant on levels, the cutset DP has
//! the same value at every vertex of a level, so the minimum is attained by a
//! whole level: `min_n s(n)·w_n`. This lets the branching-ruin estimate reach
//! depths where the tree itself would not fit in memory.

use serde::Serialize;

use super::{build_path, build_polynomial, build_regular, min_cutset_sum, EdgeWeighting, Tree, TreeError};

/// `⌊b·log₂ n⌋`, the exponent of the level size at depth `n` of the polynomial family.
pub fn polynomial_level_exponent(b: f64, n: u64) -> u32 {
    (b * (n as f64).log2()).floor() as u32
}

/// Level sizes as a step function of depth.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelProfile {
    depth: u64,
    // (first depth of the piece, level size); pieces cover 1..=depth
    pieces: Vec<(u64, f64)>,
    ln_sizes: Vec<f64>,
}

impl LevelProfile {
    fn from_pieces(depth: u64, pieces: Vec<(u64, f64, f64)>) -> LevelProfile {
        let ln_sizes = pieces.iter().map(|p| p.2).collect();
        let pieces = pieces.into_iter().map(|p| (p.0, p.1)).collect();
        LevelProfile { depth, pieces, ln_sizes }
    }

    pub fn path(depth: u64) -> Result<LevelProfile, TreeError> {
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        Ok(Self::from_pieces(depth, vec![(1, 1.0, 0.0)]))
    }

    pub fn regular(d: usize, depth: u64) -> Result<LevelProfile, TreeError> {
        if d < 2 {
            return Err(TreeError::DegreeTooSmall(d));
        }
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        if d == 2 {
            return Ok(Self::from_pieces(depth, vec![(1, 2.0, 2f64.ln())]));
        }
        if depth > 1 << 24 {
            return Err(TreeError::TooLarge { limit: 1 << 24 });
        }
        let (df, dm) = (d as f64, (d - 1) as f64);
        let pieces =
            (1..=depth).map(|n| (n, df * dm.powi((n - 1) as i32), df.ln() + (n - 1) as f64 * dm.ln())).collect();
        Ok(Self::from_pieces(depth, pieces))
    }

    /// Level sizes `2^⌊b·log₂ n⌋`.
    pub fn polynomial(b: f64, depth: u64) -> Result<LevelProfile, TreeError> {
        if !(b.is_finite() && b > 0.0) {
            return Err(TreeError::BadExponent(b));
        }
        if depth == 0 {
            return Err(TreeError::ZeroDepth);
        }
        let mut pieces = vec![(1u64, 1.0, 0.0)];
        let (mut n, mut k) = (1u64, 0u32);
        loop {
            // first depth whose exponent exceeds k; the float guess is off by at most one
            let guess = 2f64.powf((k + 1) as f64 / b).ceil();
            let mut m = if guess.is_finite() && guess <= depth as f64 { guess as u64 } else { depth + 1 };
            m = m.max(n + 1);
            while m > n + 1 && polynomial_level_exponent(b, m - 1) > k {
                m -= 1;
            }
            while m <= depth && polynomial_level_exponent(b, m) == k {
                m += 1;
            }
            if m > depth {
                break;
            }
            k = polynomial_level_exponent(b, m);
            n = m;
            pieces.push((n, 2f64.powi(k as i32), k as f64 * std::f64::consts::LN_2));
        }
        Ok(Self::from_pieces(depth, pieces))
    }

    /// Profile of a spherically symmetric tree; `None` otherwise.
    pub fn from_tree(tree: &Tree) -> Option<LevelProfile> {
        let sizes = tree.level_sizes();
        for d in 0..tree.truncation_depth() {
            let r = tree.level(d);
            let c = tree.num_children(r.start);
            if r.clone().any(|v| tree.num_children(v) != c) {
                return None;
            }
        }
        let mut pieces: Vec<(u64, f64, f64)> = Vec::new();
        for (n, &s) in sizes.iter().enumerate().skip(1) {
            if pieces.last().is_none_or(|p| p.1 != s as f64) {
                pieces.push((n as u64, s as f64, (s as f64).ln()));
            }
        }
        Some(Self::from_pieces(tree.truncation_depth() as u64, pieces))
    }

    pub fn depth(&self) -> u64 {
        self.depth
    }

    pub fn num_pieces(&self) -> usize {
        self.pieces.len()
    }

    fn piece_index(&self, n: u64) -> usize {
        self.pieces.partition_point(|p| p.0 <= n) - 1
    }

    /// Level size at depth `n` (1 at the root).
    pub fn size(&self, n: u64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        self.pieces[self.piece_index(n)].1
    }

    pub fn ln_size(&self, n: u64) -> f64 {
        if n == 0 {
            return 0.0;
        }
        self.ln_sizes[self.piece_index(n)]
    }

    /// Integer level sizes `s(0..=L)`, refusing if the total exceeds `limit`.
    pub fn exact_sizes(&self, limit: usize) -> Result<Vec<usize>, TreeError> {
        let mut out = Vec::with_capacity(self.depth as usize + 1);
        out.push(1usize);
        let mut total = 1usize;
        for n in 1..=self.depth {
            let s = self.size(n);
            if s > limit as f64 {
                return Err(TreeError::TooLarge { limit });
            }
            total += s as usize;
            if total > limit {
                return Err(TreeError::TooLarge { limit });
            }
            out.push(s as usize);
        }
        Ok(out)
    }

    /// Level DP `F_n = min(w_n, (s(n+1)/s(n))·F_{n+1})` with `F_L = w_L`.
    ///
    /// `weights[n - 1]` is the weight of every edge at depth `n`. Returns the
    /// value `s(1)·F_1` and the depth of the cut (shallowest on ties).
    pub fn level_dp(&self, weights: &[f64]) -> Result<(f64, u64), TreeError> {
        if weights.len() as u64 != self.depth {
            return Err(TreeError::WeightLength { expected: self.depth as usize, got: weights.len() });
        }
        let l = self.depth as usize;
        let mut f = weights[l - 1];
        let mut cut = self.depth;
        for n in (1..l).rev() {
            let below = self.size(n as u64 + 1) / self.size(n as u64) * f;
            if weights[n - 1] <= below {
                f = weights[n - 1];
                cut = n as u64;
            } else {
                f = below;
            }
        }
        Ok((self.size(1) * f, cut))
    }
}

/// Minimum cutset sum for weights `|e|^(-γ)`, `γ ≥ 0`, on a spherically symmetric tree.
///
/// The weights decrease with depth, so on each constant-size piece the level
/// sum is smallest at the piece's deepest level; only those are evaluated.
/// Returns the value and the depth of the minimizing level.
pub fn min_cutset_sum_profile(profile: &LevelProfile, gamma: f64) -> (f64, u64) {
    let mut best = (f64::INFINITY, 0u64);
    for (i, &(start, _)) in profile.pieces.iter().enumerate() {
        let end = profile.pieces.get(i + 1).map_or(profile.depth, |p| p.0 - 1);
        let n = if gamma == 0.0 { start } else { end };
        let ln_value = profile.ln_sizes[i] - gamma * (n as f64).ln();
        if ln_value < best.0 {
            best = (ln_value, n);
        }
    }
    (best.0.exp(), best.1)
}

/// A tree family indexed by truncation depth.
pub trait TreeFamily: Sync {
    fn name(&self) -> String;
    fn build(&self, depth: usize) -> Result<Tree, TreeError>;
    /// Level profile when the family is spherically symmetric.
    fn profile(&self, _depth: u64) -> Option<LevelProfile> {
        None
    }
}

/// The generators of this crate viewed as families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StandardFamily {
    Path,
    Regular(usize),
    Polynomial(f64),
}

impl TreeFamily for StandardFamily {
    fn name(&self) -> String {
        match self {
            StandardFamily::Path => "path".into(),
            StandardFamily::Regular(d) => format!("regular:d={d}"),
            StandardFamily::Polynomial(b) => format!("poly:b={b}"),
        }
    }

    fn build(&self, depth: usize) -> Result<Tree, TreeError> {
        match *self {
            StandardFamily::Path => build_path(depth),
            StandardFamily::Regular(d) => build_regular(d, depth),
            StandardFamily::Polynomial(b) => build_polynomial(b, depth),
        }
    }

    fn profile(&self, depth: u64) -> Option<LevelProfile> {
        match *self {
            StandardFamily::Path => LevelProfile::path(depth).ok(),
            StandardFamily::Regular(d) => LevelProfile::regular(d, depth).ok(),
            StandardFamily::Polynomial(b) => LevelProfile::polynomial(b, depth).ok(),
        }
    }
}

impl<F> TreeFamily for F
where
    F: Fn(usize) -> Result<Tree, TreeError> + Sync,
{
    fn name(&self) -> String {
        "custom".into()
    }

    fn build(&self, depth: usize) -> Result<Tree, TreeError> {
        self(depth)
    }
}

/// One row of the `(γ, L, value)` table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutsetRow {
    pub gamma: f64,
    pub depth: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchingRuinEstimate {
    /// Largest grid γ whose value at the maximal depth is at least the
    /// threshold; 0 when there is none.
    pub estimate: f64,
    pub threshold: f64,
    pub table: Vec<CutsetRow>,
}

impl BranchingRuinEstimate {
    pub fn value(&self, gamma: f64, depth: u64) -> Option<f64> {
        self.table.iter().find(|r| r.gamma == gamma && r.depth == depth).map(|r| r.value)
    }
}

pub(crate) fn check_grid(gamma_grid: &[f64], depths: &[u64]) -> Result<(), TreeError> {
    if gamma_grid.is_empty() {
        return Err(TreeError::EmptyGrid);
    }
    if depths.is_empty() {
        return Err(TreeError::EmptyDepths);
    }
    if let Some(&g) = gamma_grid.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(TreeError::BadExponent(g));
    }
    if depths.contains(&0) {
        return Err(TreeError::ZeroDepth);
    }
    Ok(())
}

pub(crate) fn summarize(mut table: Vec<CutsetRow>, threshold: f64) -> BranchingRuinEstimate {
    table.sort_by(|a, b| a.gamma.total_cmp(&b.gamma).then(a.depth.cmp(&b.depth)));
    let max_depth = table.iter().map(|r| r.depth).max().unwrap_or(0);
    let estimate =
        table.iter().filter(|r| r.depth == max_depth && r.value >= threshold).map(|r| r.gamma).fold(0.0, f64::max);
    BranchingRuinEstimate { estimate, threshold, table }
}

/// Cutset sums with weights `|e|^(-γ)` over a grid of γ and depths.
///
/// Spherically symmetric families use the level formula; others build each
/// truncation and run the full DP.
pub fn branching_ruin_estimate(
    family: &dyn TreeFamily,
    gamma_grid: &[f64],
    threshold: f64,
    depths: &[u64],
) -> Result<BranchingRuinEstimate, TreeError> {
    check_grid(gamma_grid, depths)?;
    let mut table = Vec::with_capacity(gamma_grid.len() * depths.len());
    for &depth in depths {
        if let Some(profile) = family.profile(depth) {
            for &gamma in gamma_grid {
                table.push(CutsetRow { gamma, depth, value: min_cutset_sum_profile(&profile, gamma).0 });
            }
        } else {
            let tree = family.build(depth as usize)?;
            for &gamma in gamma_grid {
                let (value, _) = min_cutset_sum(&tree, &EdgeWeighting::depth_power(&tree, gamma))?;
                table.push(CutsetRow { gamma, depth, value });
            }
        }
    }
    Ok(summarize(table, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_examples() {
        let p = LevelProfile::polynomial(1.0, 8).unwrap();
        assert_eq!((1..=8).map(|n| p.size(n)).collect::<Vec<_>>(), vec![1., 2., 2., 4., 4., 4., 4., 8.]);
        let p = LevelProfile::polynomial(0.01, 8).unwrap();
        assert_eq!(p.num_pieces(), 1);
        let p = LevelProfile::polynomial(2.0, 4).unwrap();
        assert_eq!(p.size(4), 16.0);
    }

    #[test]
    fn polynomial_pieces_match_floor_rule() {
        for &b in &[0.25, 0.5, 0.7, 1.0, 1.2, 1.5, 2.0, 3.0, 3.3] {
            let p = LevelProfile::polynomial(b, 5000).unwrap();
            for n in 1..=5000u64 {
                assert_eq!(p.size(n), 2f64.powi(polynomial_level_exponent(b, n) as i32), "b={b} n={n}");
            }
        }
    }

    #[test]
    fn huge_depths_are_cheap() {
        let p = LevelProfile::polynomial(1.2, 1 << 40).unwrap();
        assert!(p.num_pieces() < 60);
        // s(n)/n ≥ n^0.2/2 at γ = 1, while γ = 1.5 decays like n^-0.3
        let (v, _) = min_cutset_sum_profile(&p, 1.0);
        assert!(v >= 0.5);
        let (v, n) = min_cutset_sum_profile(&p, 1.5);
        assert!(v < 0.01 && n > 1 << 30);
    }

    #[test]
    fn profile_matches_tree_dp() {
        for fam in [StandardFamily::Path, StandardFamily::Regular(3), StandardFamily::Polynomial(1.5)] {
            for depth in [1usize, 2, 5, 9] {
                let tree = fam.build(depth).unwrap();
                let prof = fam.profile(depth as u64).unwrap();
                let from_tree = LevelProfile::from_tree(&tree).unwrap();
                for n in 0..=depth as u64 {
                    assert_eq!(from_tree.size(n), prof.size(n));
                }
                for gamma in [0.5, 1.0, 2.5] {
                    let (dp, _) = min_cutset_sum(&tree, &EdgeWeighting::depth_power(&tree, gamma)).unwrap();
                    let (fast, _) = min_cutset_sum_profile(&prof, gamma);
                    assert!((dp - fast).abs() <= 1e-12 * dp.max(1.0), "{} L={depth} γ={gamma}", fam.name());
                }
            }
        }
    }

    #[test]
    fn path_family_goes_to_zero() {
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        let est = branching_ruin_estimate(&StandardFamily::Path, &grid, 0.1, &[8, 64, 1 << 20]).unwrap();
        assert!(est.estimate <= 0.1);
        assert!(matches!(branching_ruin_estimate(&StandardFamily::Path, &[], 0.1, &[8]), Err(TreeError::EmptyGrid)));
    }

    #[test]
    fn regular_family_saturates_grid() {
        let grid = [0.5, 1.0, 2.0];
        let est = branching_ruin_estimate(&StandardFamily::Regular(3), &grid, 0.1, &[2, 4, 8, 16]).unwrap();
        assert_eq!(est.estimate, 2.0);
        assert!(est.value(1.0, 16).unwrap() >= 3.0 - 1e-12);
    }

    #[test]
    fn closure_family_uses_full_dp() {
        let fam = |l: usize| build_regular(3, l);
        let a = branching_ruin_estimate(&fam, &[1.0], 0.1, &[4]).unwrap();
        let b = branching_ruin_estimate(&StandardFamily::Regular(3), &[1.0], 0.1, &[4]).unwrap();
        assert!((a.table[0].value - b.table[0].value).abs() < 1e-12);
    }
}
