use crate::seed::{mix, unit_open_closed};

/// Rate-1 exponential variates `ξ(v, u, j)` addressed by key.
///
/// Each variate is a pure function of `(seed, v, u, j)`, so every process
/// reading the table sees the same value for a key no matter in which order
/// keys are requested. Nothing is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClockTable {
    seed: u64,
}

impl ClockTable {
    pub fn new(seed: u64) -> ClockTable {
        ClockTable { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn xi(&self, v: usize, u: usize, j: u64) -> f64 {
        -unit_open_closed(mix(self.seed, &[v as u64, u as u64, j])).ln()
    }
}
