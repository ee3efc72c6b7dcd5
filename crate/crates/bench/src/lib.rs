//! Inputs shared by the benchmarks.

use confsweep::sweep::{enumerate_all, SweepOptions};
use confsweep::Configuration;

/// Raw sweep outputs for `(n, k)` on one worker.
pub fn swept(n: usize, k: usize) -> Vec<Configuration> {
    enumerate_all(n, k, &SweepOptions::default())
        .expect("valid parameters")
        .into_iter()
        .map(|o| o.config)
        .collect()
}
