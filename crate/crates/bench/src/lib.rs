//! Fixtures shared by the criterion benches.

use tsketch::{gen_instance, Family, Instance, InstanceSpec, RecoveryConfig};

/// Noise-free instance of the given family.
pub fn instance(family: Family, d: usize, k: usize, seed: u64) -> Instance {
    gen_instance(&InstanceSpec { family, d, k, sigma: 0.0, seed }).expect("valid bench instance")
}

/// Fixed-budget greedy configuration used across the sweep.
pub fn sweep_config(k: usize, seed: u64) -> RecoveryConfig {
    RecoveryConfig { k, r1: Some(k), r2: Some(4), m1: Some(48), m2: Some(48), seed, ..Default::default() }
}
