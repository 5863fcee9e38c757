use crate::tree::{check_grid, min_cutset_sum, summarize, BranchingRuinEstimate, CutsetRow, EdgeWeighting, Tree};

use super::{EnvError, Environment};

/// Tables of `R`, `φ`, `ψ` and `Ψ`, filled once per (tree, environment).
///
/// Edge quantities are indexed by the lower endpoint of the edge.
#[derive(Debug, Clone)]
pub struct Potentials {
    resistance: Vec<f64>,
    phi: Vec<f64>,
    psi: Vec<f64>,
    ln_psi: Vec<f64>,
    ln_ruin: Vec<f64>,
}

impl Potentials {
    pub fn new(tree: &Tree, env: &Environment) -> Result<Potentials, EnvError> {
        env.check_tree(tree)?;
        let n = tree.len();
        // R(ρ) = 1 makes R(x) = R(x⁻¹)·μ_{x⁻¹} valid at depth 1 as well
        let mut resistance = vec![1.0; n];
        let mut phi = vec![0.0; n];
        let mut psi = vec![1.0; n];
        let mut ln_psi = vec![0.0; n];
        let mut ln_ruin = vec![0.0; n];
        for u in 1..n {
            let p = tree.parent(u).unwrap();
            resistance[u] = resistance[p] * env.mu(p);
            phi[u] = phi[p] + resistance[u];
            if !phi[u].is_finite() {
                return Err(EnvError::Overflow(u));
            }
            if p != 0 {
                // 1 − φ(u⁻²)/φ(u) = (R(u⁻¹) + R(u))/φ(u)
                let lead = (resistance[p] + resistance[u]) / phi[u];
                let (lam, mu, deg) = (env.lambda(p), env.mu(p), tree.degree(p) as f64);
                let t = lead * (lam + (deg - 2.0) * mu / (mu + 1.0)) / (lam + deg - 1.0);
                psi[u] = 1.0 - t;
                ln_psi[u] = (-t).ln_1p();
            }
            ln_ruin[u] = ln_ruin[p] + ln_psi[u];
        }
        Ok(Potentials { resistance, phi, psi, ln_psi, ln_ruin })
    }

    /// `R(e) = ∏ μ_{z⁻¹}` over the edges `(z⁻¹, z)` of the root path of `e`.
    pub fn resistance(&self, e: usize) -> f64 {
        self.resistance[e]
    }

    /// `φ(x) = Σ_{e∈P_x} R(e)`, zero at the root.
    pub fn phi(&self, x: usize) -> f64 {
        self.phi[x]
    }

    /// Per-edge factor `ψ(u⁻¹, u)`; 1 on edges at the root.
    pub fn psi(&self, e: usize) -> f64 {
        self.psi[e]
    }

    pub fn ln_psi(&self, e: usize) -> f64 {
        self.ln_psi[e]
    }

    /// Ruin probability `Ψ(e) = ∏_{g≤e} ψ(g)`.
    pub fn ruin(&self, e: usize) -> f64 {
        self.ln_ruin[e].exp()
    }

    pub fn ln_ruin(&self, e: usize) -> f64 {
        self.ln_ruin[e]
    }

    /// Adapted conductance `c(e) = Ψ(e)/(1 − ψ(e))`, and 1 at depth one.
    ///
    /// `None` when `ψ(e) = 1` below the first level.
    pub fn conductance(&self, tree: &Tree, e: usize) -> Option<f64> {
        if tree.depth(e) == 1 {
            return Some(1.0);
        }
        let gap = 1.0 - self.psi[e];
        (gap > 0.0).then(|| self.ruin(e) / gap)
    }

    /// Weighting `Ψ(e)^γ`.
    pub fn ruin_weights(&self, tree: &Tree, gamma: f64) -> EdgeWeighting {
        EdgeWeighting::from_fn(tree, |v| (gamma * self.ln_ruin[v]).exp()).expect("Ψ^γ lies in [0, 1]")
    }
}

/// `sup_{|v|≥2} R(v⁻¹, v)/φ(v⁻¹)`; 0 (with a warning) when the tree has depth 1.
pub fn rt_hypothesis_sup(tree: &Tree, pot: &Potentials) -> f64 {
    if tree.truncation_depth() < 2 {
        log::warn!("tree of depth {} has no vertex at depth 2; supremum taken as 0", tree.truncation_depth());
        return 0.0;
    }
    let start = tree.level(2).start;
    (start..tree.len()).map(|v| pot.resistance(v) / pot.phi(tree.parent(v).unwrap())).fold(0.0, f64::max)
}

/// Cutset sums with weights `Ψ(e)^γ` over a grid of γ and truncation depths.
///
/// `family(L)` must return the depth-`L` truncation together with an
/// environment that agrees with the other truncations on common vertices.
pub fn rt_estimate(
    family: &dyn Fn(usize) -> Result<(Tree, Environment), EnvError>,
    gamma_grid: &[f64],
    threshold: f64,
    depths: &[u64],
) -> Result<BranchingRuinEstimate, EnvError> {
    check_grid(gamma_grid, depths)?;
    let mut table = Vec::new();
    for &depth in depths {
        let (tree, env) = family(depth as usize)?;
        let pot = Potentials::new(&tree, &env)?;
        for &gamma in gamma_grid {
            let (value, _) = min_cutset_sum(&tree, &pot.ruin_weights(&tree, gamma))?;
            table.push(CutsetRow { gamma, depth, value });
        }
    }
    Ok(summarize(table, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{sample_random_environment, AlphaDistribution};
    use crate::tree::{build_path, build_regular};

    #[test]
    fn mu_two_on_path() {
        let t = build_path(3).unwrap();
        let env = Environment::constant(&t, 1.0, 2.0).unwrap();
        let pot = Potentials::new(&t, &env).unwrap();
        assert_eq!((pot.resistance(1), pot.resistance(2), pot.resistance(3)), (1.0, 2.0, 4.0));
        assert_eq!((pot.phi(0), pot.phi(3)), (0.0, 7.0));
        assert_eq!(rt_hypothesis_sup(&t, &pot), 2.0);
    }

    #[test]
    fn symmetric_values() {
        let t = build_path(4).unwrap();
        let pot = Potentials::new(&t, &Environment::simple(&t)).unwrap();
        assert_eq!(pot.psi(1), 1.0);
        assert!((pot.psi(2) - 0.5).abs() < 1e-15);
        assert!((pot.ruin(4) - 0.25).abs() < 1e-15);
        assert_eq!(rt_hypothesis_sup(&t, &pot), 1.0);
    }

    #[test]
    fn alpha_one_depth_three() {
        let t = build_regular(3, 4).unwrap();
        let env = sample_random_environment(&t, &AlphaDistribution::Point(1.0), 0).unwrap();
        let pot = Potentials::new(&t, &env).unwrap();
        let e = t.leftmost_at_depth(3).unwrap();
        assert!((pot.ruin(e) - 0.125).abs() < 1e-15);
        assert!((pot.psi(e) - 0.5).abs() < 1e-15);
        assert!((pot.conductance(&t, e).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn depth_one_sup_is_zero() {
        let t = build_regular(3, 1).unwrap();
        let pot = Potentials::new(&t, &Environment::simple(&t)).unwrap();
        assert_eq!(rt_hypothesis_sup(&t, &pot), 0.0);
    }

    #[test]
    fn rt_estimate_rejects_empty_grid() {
        let fam = |l: usize| -> Result<(Tree, Environment), EnvError> {
            let t = build_path(l)?;
            let e = Environment::simple(&t);
            Ok((t, e))
        };
        assert!(rt_estimate(&fam, &[], 0.1, &[4]).is_err());
        let est = rt_estimate(&fam, &[0.5, 1.0], 0.1, &[8, 64]).unwrap();
        assert!(est.value(1.0, 64).unwrap() < est.value(1.0, 8).unwrap());
    }
}
