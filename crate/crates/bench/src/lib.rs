//! Shared fixtures for the benchmarks.

use wpid_core::rng::Xoshiro256;
use wpid_core::simulator::{generate, Scenario, ScenarioConfig};

/// The default two-walker scenario, 2000 frames.
pub fn two_person() -> Scenario {
    generate(&ScenarioConfig::two_person()).expect("preset is valid")
}

pub fn three_person() -> Scenario {
    generate(&ScenarioConfig::three_person()).expect("preset is valid")
}

/// Uniform random weights in [0, 1).
pub fn random_weights(rows: usize, cols: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    (0..rows).map(|_| (0..cols).map(|_| rng.next_f64()).collect()).collect()
}

/// A noisy 1 Hz sinusoid sampled at `rate`.
pub fn noisy_signal(len: usize, rate: f64, seed: u64) -> Vec<f64> {
    let mut rng = Xoshiro256::seed_from_u64(seed);
    (0..len)
        .map(|i| (std::f64::consts::TAU * i as f64 / rate).sin() + 0.1 * rng.next_normal())
        .collect()
}
