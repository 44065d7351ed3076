//! Agents that become attack targets and shadow policies: DQN and
//! REINFORCE on grid worlds, Gaussian REINFORCE on PointBot.

mod dqn;
mod env;
mod eval;
mod gaussian;
mod pg;
mod replay;

pub use dqn::{train_dqn, DqnConfig, DqnLearner};
pub use env::{check_contract, EnvStep, Episodic, FamilyEnv, GridEnv, PointBotEnv};
pub use eval::{evaluate_policy, goal_eval, goal_rate, rollout, GoalEval, RewardStats};
pub use gaussian::{train_gaussian_pg, GaussianPgConfig};
pub use pg::{train_pg, PgConfig};
pub use replay::{LinearSchedule, ReplayBuffer, Transition};
