//! Training and attacking small reinforcement-learning policies.
//!
//! The crate trains agents on privacy-sensitive environments (LiDAR grid
//! world floor plans, parametrized point-mass robots) and then recovers the
//! training environment from black-box access to the trained policy:
//!
//! * [`ga_attack`] searches constraint-valid floor plans with a genetic
//!   algorithm, scoring each candidate by how well the target's actions agree
//!   with the candidate's optimal policy.
//! * [`baseline_attacks`] provides random search and a DQN-driven search over
//!   cell flips that share the same fitness function.
//! * [`shadow_inference`] trains shadow policies on every known candidate
//!   dynamics, summarizes each policy by its episodic reward statistics on all
//!   candidates and classifies a target with a linear SVM.

pub mod baseline_attacks;
pub mod env_families;
pub mod error;
pub mod ga_attack;
pub mod gridworld;
pub mod neuralnet;
pub mod report;
pub mod seeding;
pub mod shadow_inference;
pub mod trainers;

pub use error::{Error, Result};
pub use gridworld::{GridAction, GridMap, LidarObservation, MdpSpec, QTable};
pub use neuralnet::{MlpParams, MlpPolicy, PolicyHead};
