//! Shared fixtures for the criterion benches.

use dynsleuth_core::gridworld::random_map;
use dynsleuth_core::neuralnet::{InputContract, MlpParams, MlpPolicy, PolicyHead};
use dynsleuth_core::seeding::stream;
use dynsleuth_core::GridMap;

/// Constraint-valid 7x7 maps with the goal in the bottom-right corner.
pub fn maps(count: usize, seed: u64) -> Vec<GridMap> {
    (0..count)
        .map(|i| random_map(7, 7, 48, 0.3, &mut stream(seed, "bench_map", i as u64), 100_000).expect("valid map"))
        .collect()
}

/// Untrained LiDAR softmax policy with the default agent architecture.
pub fn lidar_policy(seed: u64) -> MlpPolicy {
    let params = MlpParams::init(&[8, 64, 64, 5], &mut stream(seed, "bench_policy", 0)).expect("dims");
    MlpPolicy::new(params, PolicyHead::Logits, InputContract::Lidar).expect("policy")
}
