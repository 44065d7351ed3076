//! Comparison searchers sharing the genetic attack's fitness: independent
//! random guesses and a DQN that edits a guessed map one cell at a time.

mod random;
mod rl;

pub use random::{random_search, Budget, SearchOutcome, DEFAULT_RANDOM_BUDGET};
pub use rl::{rl_search, FlipReward, RlSearchConfig};
