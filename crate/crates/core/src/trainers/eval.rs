use serde::{Deserialize, Serialize};

use super::env::{check_contract, Episodic, GridEnv};
use crate::error::{domain, Result};
use crate::neuralnet::MlpPolicy;
use crate::seeding::{derive_seed, stream};

/// Episodic returns of `k` trials with their mean and population variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardStats {
    pub returns: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
}

impl RewardStats {
    pub fn from_returns(returns: Vec<f64>) -> Self {
        let n = returns.len().max(1) as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let variance = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
        Self {
            returns,
            mean,
            variance,
        }
    }
}

/// Undiscounted return of one episode. The environment is reset with
/// `env_seed`; stochastic policies sample with a stream derived from it.
pub fn rollout<E: Episodic>(policy: &MlpPolicy, env: &mut E, env_seed: u64) -> Result<f64> {
    let mut rng = stream(env_seed, "policy", 0);
    let mut obs = env.reset(env_seed);
    let mut total = 0.0;
    loop {
        let action = E::select_action(policy, &obs, &mut rng)?;
        let s = env.step(action)?;
        total += s.reward;
        if s.done() {
            return Ok(total);
        }
        obs = s.obs;
    }
}

pub fn evaluate_policy<E: Episodic>(
    policy: &MlpPolicy,
    env: &mut E,
    episodes: usize,
    seed: u64,
) -> Result<RewardStats> {
    check_contract(policy, env)?;
    if episodes == 0 {
        return domain("evaluate_policy needs at least one episode");
    }
    let returns = (0..episodes as u64)
        .map(|i| rollout(policy, env, derive_seed(seed, "eval", i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RewardStats::from_returns(returns))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalEval {
    /// Fraction of start cells whose rollout reached the goal.
    pub rate: f64,
    pub mean_return: f64,
}

/// Fraction of non-goal free cells from which one rollout reaches the goal
/// within the step limit.
pub fn goal_rate(policy: &MlpPolicy, env: &GridEnv, seed: u64) -> Result<f64> {
    Ok(goal_eval(policy, env, seed)?.rate)
}

/// One rollout from every non-goal free cell.
pub fn goal_eval(policy: &MlpPolicy, env: &GridEnv, seed: u64) -> Result<GoalEval> {
    check_contract(policy, env)?;
    let mut env = env.clone();
    let starts = env.start_cells().to_vec();
    let mut reached = 0;
    let mut total = 0.0;
    for (i, &cell) in starts.iter().enumerate() {
        let env_seed = derive_seed(seed, "goal_rate", i as u64);
        let mut rng = stream(env_seed, "policy", 0);
        let mut obs = env.reset_at(cell, env_seed)?;
        loop {
            let action = policy.act_discrete(&obs, &mut rng)?;
            let s = env.step(action)?;
            total += s.reward;
            if s.terminal {
                reached += 1;
            }
            if s.done() {
                break;
            }
            obs = s.obs;
        }
    }
    let n = starts.len() as f64;
    Ok(GoalEval {
        rate: reached as f64 / n,
        mean_return: total / n,
    })
}
