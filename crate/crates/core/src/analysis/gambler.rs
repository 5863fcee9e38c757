use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::AnalysisError;
use crate::seed::derive_seed;
use crate::stats::Proportion;

/// Birth–death chain on `{0, …, N}` absorbed at both ends, stepping up from
/// `i` with probability `pᵢ = 1/(1+μᵢ)` and down with `qᵢ = μᵢ/(1+μᵢ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GamblerChain {
    biases: Vec<f64>,
    start: usize,
}

impl GamblerChain {
    /// `biases[i - 1] = μᵢ` for `i = 1..N−1`, so `N = biases.len() + 1`.
    pub fn new(biases: Vec<f64>, start: usize) -> Result<GamblerChain, AnalysisError> {
        if biases.is_empty() {
            return Err(AnalysisError::ChainTooShort);
        }
        if let Some((i, &m)) = biases.iter().enumerate().find(|(_, m)| !(m.is_finite() && **m > 0.0)) {
            return Err(AnalysisError::BadBias { index: i + 1, value: m });
        }
        let n = biases.len() + 1;
        if start > n {
            return Err(AnalysisError::StartOutOfRange { start, n });
        }
        Ok(GamblerChain { biases, start })
    }

    pub fn n(&self) -> usize {
        self.biases.len() + 1
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// `μᵢ` for `1 ≤ i ≤ N−1`.
    pub fn bias(&self, i: usize) -> f64 {
        self.biases[i - 1]
    }

    /// Terms `∏_{h<j} μ_h` for `j = 1..=N`; `φ(k)` is the sum of the first `k`.
    fn increments(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n());
        let mut prod = 1.0;
        out.push(prod);
        for &m in &self.biases {
            prod *= m;
            out.push(prod);
        }
        out
    }

    /// `φ(k) = Σ_{j=1}^{k} ∏_{h=1}^{j−1} μ_h`.
    pub fn phi(&self, k: usize) -> f64 {
        self.increments()[..k].iter().sum()
    }

    /// Ruin probabilities `x₀ = 1, …, x_N = 0`.
    pub fn ruin_probabilities(&self) -> Vec<f64> {
        let inc = self.increments();
        // x_i = (φ(N) − φ(i))/φ(N), summed from the top to avoid cancellation;
        // φ(N) is the last tail so the x_i stay ordered after rounding
        let mut tails = vec![0.0; self.n() + 1];
        for i in (0..self.n()).rev() {
            tails[i] = tails[i + 1] + inc[i];
        }
        let total = tails[0];
        tails.iter().map(|t| t / total).collect()
    }
}

/// `x_i = 1 − φ(i)/φ(N)`, the probability of hitting 0 before N from `i`.
pub fn gambler_ruin_exact(chain: &GamblerChain) -> f64 {
    chain.ruin_probabilities()[chain.start]
}

/// Exact rational ruin probability for rational biases.
pub fn gambler_ruin_rational(biases: &[BigRational], start: usize) -> Result<BigRational, AnalysisError> {
    if biases.is_empty() {
        return Err(AnalysisError::ChainTooShort);
    }
    let n = biases.len() + 1;
    if start > n {
        return Err(AnalysisError::StartOutOfRange { start, n });
    }
    if let Some(i) = biases.iter().position(|m| *m <= BigRational::zero()) {
        return Err(AnalysisError::BadBias { index: i + 1, value: f64::NAN });
    }
    let mut prod = BigRational::one();
    let mut phi = vec![BigRational::zero()];
    for j in 1..=n {
        if j > 1 {
            prod *= &biases[j - 2];
        }
        let next = phi[j - 1].clone() + &prod;
        phi.push(next);
    }
    Ok(BigRational::one() - phi[start].clone() / phi[n].clone())
}

/// Monte Carlo estimate of the ruin probability with its standard error.
pub fn gambler_ruin_mc(chain: &GamblerChain, trials: u64, seed: u64) -> Result<(f64, f64), AnalysisError> {
    if trials < 100 {
        return Err(AnalysisError::TooFewTrials(trials));
    }
    let n = chain.n();
    let up: Vec<f64> = chain.biases.iter().map(|m| 1.0 / (1.0 + m)).collect();
    let ruined: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t));
            let mut i = chain.start;
            while i != 0 && i != n {
                if rng.random::<f64>() < up[i - 1] {
                    i += 1;
                } else {
                    i -= 1;
                }
            }
            u64::from(i == 0)
        })
        .sum();
    let p = Proportion::new(ruined, trials);
    Ok((p.estimate(), p.std_error()))
}
