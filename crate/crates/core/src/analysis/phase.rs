//! Directional recurrence/transience diagnostic.
//!
//! The walk is run in the annealed setting (fresh environment and fresh walk
//! per trial) until it reaches depth `D`, returns to the root `k` times, or
//! exhausts the horizon. Its escape frequency is compared with a control run
//! on the polynomial tree of exponent `2 − m`, the critical geometry for the
//! same α law, with the same depth, stopping rule and trial count:
//!
//! * transient-leaning: escape frequency ≥ 0.05 and above the control by more
//!   than 3 combined standard errors;
//! * recurrent-leaning: escape frequency below control + 3σ;
//! * inconclusive otherwise.
//!
//! Configurations whose branching-ruin estimate lies within the margin of
//! `2 − m` are refused.

use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::environment::{sample_random_environment, AlphaDistribution};
use crate::seed::{derive_seed, mix};
use crate::stats::{mean_and_se, Proportion};
use crate::tree::{branching_ruin_estimate, StandardFamily, Tree, TreeFamily};
use crate::walk::{simulate_summary, StopReason, StopRule};

/// Escape frequencies below this never count as transient evidence.
pub const MIN_TRANSIENT_ESCAPE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseConfig {
    pub family: StandardFamily,
    pub tree_depth: usize,
    pub dist: AlphaDistribution,
    pub epsilon_margin: f64,
    /// Escape depth `D`.
    pub escape_depth: usize,
    pub horizon: u64,
    pub trials: u64,
    /// Returns to the root that end a trial.
    pub returns: u64,
    pub master_seed: u64,
    /// γ grid and depths for the branching-ruin estimate.
    pub br_grid: Vec<f64>,
    pub br_depths: Vec<u64>,
    pub br_threshold: f64,
}

impl PhaseConfig {
    pub fn new(family: StandardFamily, tree_depth: usize, dist: AlphaDistribution, escape_depth: usize) -> Self {
        PhaseConfig {
            family,
            tree_depth,
            dist,
            epsilon_margin: 0.1,
            escape_depth,
            horizon: 1_000_000,
            trials: 2000,
            returns: 10,
            master_seed: 0,
            br_grid: (1..=80).map(|i| i as f64 * 0.05).collect(),
            br_depths: (1..=5).map(|k| 1u64 << (4 * k)).collect(),
            br_threshold: 0.1,
        }
    }
}

/// Statistics of one batch of annealed runs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRun {
    pub family: String,
    pub trials: u64,
    pub escapes: u64,
    pub escape_frequency: f64,
    pub std_error: f64,
    pub mean_returns: f64,
    pub mean_returns_se: f64,
    /// Fraction of trials stopped by the horizon.
    pub horizon_fraction: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    RecurrentLeaning,
    TransientLeaning,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::RecurrentLeaning => "recurrent-leaning",
            Verdict::TransientLeaning => "transient-leaning",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseVerdict {
    pub family: String,
    pub env: String,
    pub m: f64,
    pub br_estimate: f64,
    pub threshold: f64,
    pub escape_depth: usize,
    pub run: PhaseRun,
    pub control: PhaseRun,
    /// `sqrt(se_run² + se_control²)`.
    pub sigma: f64,
    pub verdict: Verdict,
}

impl PhaseVerdict {
    /// The verdict implied by the recorded frequencies.
    pub fn rule(escape: f64, control: f64, sigma: f64) -> Verdict {
        if escape >= MIN_TRANSIENT_ESCAPE && escape > control + 3.0 * sigma {
            Verdict::TransientLeaning
        } else if escape < control + 3.0 * sigma {
            Verdict::RecurrentLeaning
        } else {
            Verdict::Inconclusive
        }
    }
}

fn annealed_runs(tree: &Tree, name: String, cfg: &PhaseConfig, seed: u64) -> Result<PhaseRun, AnalysisError> {
    let stop = StopRule::hit_depth(cfg.escape_depth).or_returns(cfg.returns).or_max_steps(cfg.horizon);
    let outcomes: Vec<(bool, u64, bool)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| -> Result<_, AnalysisError> {
            let env = sample_random_environment(tree, &cfg.dist, derive_seed(seed, 2 * i))?;
            let s = simulate_summary(tree, &env, &stop, derive_seed(seed, 2 * i + 1))?;
            let escaped = matches!(s.reason, StopReason::HitDepth | StopReason::Escaped);
            Ok((escaped, s.returns_to_root, s.reason == StopReason::MaxSteps))
        })
        .collect::<Result<_, _>>()?;
    let escapes = outcomes.iter().filter(|o| o.0).count() as u64;
    let p = Proportion::new(escapes, cfg.trials);
    let returns: Vec<f64> = outcomes.iter().map(|o| o.1 as f64).collect();
    let (mean_returns, mean_returns_se) = mean_and_se(&returns);
    let horizon = outcomes.iter().filter(|o| o.2).count() as f64 / cfg.trials as f64;
    Ok(PhaseRun {
        family: name,
        trials: cfg.trials,
        escapes,
        escape_frequency: p.estimate(),
        std_error: p.std_error(),
        mean_returns,
        mean_returns_se,
        horizon_fraction: horizon,
    })
}

/// Runs the diagnostic and its critical-geometry control.
pub fn phase_diagnostic(cfg: &PhaseConfig) -> Result<PhaseVerdict, AnalysisError> {
    cfg.dist.validate()?;
    if cfg.trials < 100 {
        return Err(AnalysisError::TooFewTrials(cfg.trials));
    }
    let m = cfg.dist.mean_inverse();
    let threshold = 2.0 - m;
    let br = branching_ruin_estimate(&cfg.family, &cfg.br_grid, cfg.br_threshold, &cfg.br_depths)?;
    if (br.estimate - threshold).abs() < cfg.epsilon_margin {
        return Err(AnalysisError::NearCritical { estimate: br.estimate, threshold, margin: cfg.epsilon_margin });
    }
    let tree = cfg.family.build(cfg.tree_depth)?;
    let run = annealed_runs(&tree, cfg.family.name(), cfg, cfg.master_seed)?;
    let control_family = StandardFamily::Polynomial(threshold);
    let control_tree = control_family.build(cfg.tree_depth)?;
    let control_seed = mix(cfg.master_seed, &[0x636f_6e74_726f_6c00]);
    let control = annealed_runs(&control_tree, control_family.name(), cfg, control_seed)?;
    let sigma = run.std_error.hypot(control.std_error);
    let verdict = PhaseVerdict::rule(run.escape_frequency, control.escape_frequency, sigma);
    Ok(PhaseVerdict {
        family: cfg.family.name(),
        env: cfg.dist.to_string(),
        m,
        br_estimate: br.estimate,
        threshold,
        escape_depth: cfg.escape_depth,
        run,
        control,
        sigma,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_cases() {
        assert_eq!(PhaseVerdict::rule(0.5, 0.2, 0.01), Verdict::TransientLeaning);
        assert_eq!(PhaseVerdict::rule(0.2, 0.5, 0.01), Verdict::RecurrentLeaning);
        assert_eq!(PhaseVerdict::rule(0.04, 0.0, 0.001), Verdict::Inconclusive);
    }

    #[test]
    fn refuses_near_critical() {
        // threshold 1.5; the finite-depth estimate for b = 1.5 sits slightly above
        let mut cfg = PhaseConfig::new(StandardFamily::Polynomial(1.5), 32, AlphaDistribution::Point(1.0), 24);
        cfg.trials = 100;
        cfg.epsilon_margin = 0.2;
        assert!(matches!(phase_diagnostic(&cfg), Err(AnalysisError::NearCritical { .. })));
    }
}
