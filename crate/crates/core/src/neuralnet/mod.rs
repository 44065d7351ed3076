//! Small fully-connected networks with exact reverse-mode gradients,
//! SGD/Adam optimizers and the policy wrapper used by every agent.

mod loss;
mod mlp;
mod optim;
mod policy;
pub mod policy_file;

pub use loss::{log_softmax, mse_loss, softmax, softmax_cross_entropy, softmax_entropy};
pub use mlp::{ForwardTrace, MlpParams};
pub use optim::{OptimizerAlgo, OptimizerConfig, OptimizerState};
pub use policy::{sample_categorical, InputContract, MlpPolicy, PolicyHead};
pub use policy_file::{decode_policy, encode_policy, load_policy, save_policy};

/// The LiDAR agent network: 8 inputs, two hidden layers of 64, 5 actions.
pub const LIDAR_NET_DIMS: [usize; 4] = [8, 64, 64, 5];
