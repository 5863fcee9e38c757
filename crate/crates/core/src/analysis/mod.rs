//! Closed-form oracles, the flow-energy check and the phase diagnostic.

mod flow;
mod gambler;
mod phase;

pub use flow::{flow_energy_check, tree_max_flow, FlowRow, MaxFlow};
pub use gambler::{gambler_ruin_exact, gambler_ruin_mc, gambler_ruin_rational, GamblerChain};
pub use num_rational::BigRational;
pub use phase::{phase_diagnostic, PhaseConfig, PhaseRun, PhaseVerdict, Verdict};

use crate::environment::EnvError;
use crate::tree::TreeError;
use crate::walk::WalkError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("a gambler chain needs at least one bias (N >= 2)")]
    ChainTooShort,
    #[error("start {start} is outside 0..={n}")]
    StartOutOfRange { start: usize, n: usize },
    #[error("bias mu_{index} must be positive and finite, got {value}")]
    BadBias { index: usize, value: f64 },
    #[error("at least 100 trials are required, got {0}")]
    TooFewTrials(u64),
    #[error("range list is empty")]
    EmptyRanges,
    #[error("range ({0}, {1}) has b < a")]
    BadRange(f64, f64),
    #[error("t must be positive, got {0}")]
    NonPositiveT(f64),
    #[error("gamma must be positive, got {0}")]
    BadGamma(f64),
    #[error("depth {depth} exceeds the tree's truncation depth {max}")]
    DepthTooLarge { depth: usize, max: usize },
    #[error(
        "near-critical configuration: br_r estimate {estimate} is within {margin} of the threshold 2 - m = {threshold}"
    )]
    NearCritical { estimate: f64, threshold: f64, margin: f64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

/// Hoeffding's bound `2·exp(−2t²/Σ(bᵢ−aᵢ)²)`, capped at 1.
pub fn hoeffding_bound(t: f64, ranges: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if ranges.is_empty() {
        return Err(AnalysisError::EmptyRanges);
    }
    if t.is_nan() || t <= 0.0 {
        return Err(AnalysisError::NonPositiveT(t));
    }
    if let Some(&(a, b)) = ranges.iter().find(|(a, b)| a.is_nan() || b.is_nan() || b < a) {
        return Err(AnalysisError::BadRange(a, b));
    }
    let width: f64 = ranges.iter().map(|(a, b)| (b - a).powi(2)).sum();
    Ok((2.0 * (-2.0 * t * t / width).exp()).min(1.0))
}
