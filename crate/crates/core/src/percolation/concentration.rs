use rayon::prelude::*;
use serde::Serialize;

use crate::environment::{sample_random_environment, AlphaDistribution, EnvError, Environment, Potentials};
use crate::seed::derive_seed;
use crate::stats::Proportion;
use crate::tree::Tree;

/// Whether `κ⁻¹|e|^(−2+m−ε) ≤ Ψ(e) ≤ |e|^(−2+m+ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationEvent {
    pub edge: usize,
    pub kappa: f64,
    pub epsilon: f64,
    pub ruin: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

pub fn concentration_event(
    tree: &Tree,
    env: &Environment,
    pot: &Potentials,
    e: usize,
    epsilon: f64,
) -> Result<ConcentrationEvent, EnvError> {
    let m = env
        .m()
        .ok_or_else(|| EnvError::BadDistribution("environment was not sampled from an alpha distribution".into()))?;
    let kappa = env.kappa(tree).expect("sampled environments carry alpha");
    let d = tree.depth(e) as f64;
    let ruin = pot.ruin(e);
    let lower = d.powf(-2.0 + m - epsilon) / kappa;
    let upper = d.powf(-2.0 + m + epsilon);
    Ok(ConcentrationEvent { edge: e, kappa, epsilon, ruin, lower, upper, holds: lower <= ruin && ruin <= upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub depth: usize,
    pub failures: u64,
    pub samples: u64,
    pub frequency: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationTable {
    pub epsilon: f64,
    pub m: f64,
    pub rows: Vec<ConcentrationRow>,
}

impl ConcentrationTable {
    /// Failure frequency never rises from one depth to the next by more than
    /// `k` combined standard errors, counting only depths `≥ burn_in`.
    pub fn nonincreasing_after(&self, burn_in: usize, k: f64) -> bool {
        let rows: Vec<&ConcentrationRow> = self.rows.iter().filter(|r| r.depth >= burn_in).collect();
        rows.windows(2).all(|w| {
            let se = (w[0].std_error.powi(2) + w[1].std_error.powi(2)).sqrt();
            w[1].frequency <= w[0].frequency + k * se
        })
    }
}

/// Frequency of `B_e` failing at the leftmost edge of each depth over
/// `env_samples` independent environments.
pub fn concentration_experiment(
    tree: &Tree,
    dist: &AlphaDistribution,
    epsilon: f64,
    depths: &[usize],
    env_samples: u64,
    master_seed: u64,
) -> Result<ConcentrationTable, EnvError> {
    dist.validate()?;
    let edges: Vec<usize> = depths
        .iter()
        .map(|&d| {
            tree.leftmost_at_depth(d).filter(|_| d >= 1).ok_or(EnvError::Tree(crate::tree::TreeError::NoSuchVertex(d)))
        })
        .collect::<Result<_, _>>()?;
    let per_sample: Vec<Vec<bool>> = (0..env_samples)
        .into_par_iter()
        .map(|s| -> Result<Vec<bool>, EnvError> {
            let env = sample_random_environment(tree, dist, derive_seed(master_seed, s))?;
            let pot = Potentials::new(tree, &env)?;
            edges.iter().map(|&e| concentration_event(tree, &env, &pot, e, epsilon).map(|c| !c.holds)).collect()
        })
        .collect::<Result<_, _>>()?;
    let rows = depths
        .iter()
        .enumerate()
        .map(|(i, &depth)| {
            let failures = per_sample.iter().filter(|f| f[i]).count() as u64;
            let p = Proportion::new(failures, env_samples);
            ConcentrationRow {
                depth,
                failures,
                samples: env_samples,
                frequency: p.estimate(),
                std_error: p.std_error(),
            }
        })
        .collect();
    Ok(ConcentrationTable { epsilon, m: dist.mean_inverse(), rows })
}
