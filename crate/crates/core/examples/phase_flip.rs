//! Escape frequencies on the b = 1.2 polynomial tree under α ≡ 0 and α ≡ 1.
//!
//! Run with `cargo run --release --example phase_flip -- [trials]`.

use goerw::analysis::{phase_diagnostic, PhaseConfig};
use goerw::environment::AlphaDistribution;
use goerw::tree::StandardFamily;

fn main() {
    let trials = std::env::args().nth(1).map_or(2000, |s| s.parse().expect("trials"));
    for alpha in [0.0, 1.0] {
        let mut cfg = PhaseConfig::new(StandardFamily::Polynomial(1.2), 64, AlphaDistribution::Point(alpha), 48);
        cfg.trials = trials;
        cfg.master_seed = 20;
        let start = std::time::Instant::now();
        let v = phase_diagnostic(&cfg).expect("diagnostic");
        println!(
            "alpha={alpha} br={:.2} threshold={} escape={:.4}±{:.4} control={:.4}±{:.4} horizon={:.3} verdict={} ({:.1?})",
            v.br_estimate,
            v.threshold,
            v.run.escape_frequency,
            v.run.std_error,
            v.control.escape_frequency,
            v.control.std_error,
            v.run.horizon_fraction,
            v.verdict,
            start.elapsed()
        );
    }
}
