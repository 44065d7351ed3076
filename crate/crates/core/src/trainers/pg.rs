use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dqn::clip_grad_norm;
use super::env::{Episodic, GridEnv};
use super::eval::goal_eval;
use crate::error::{config, Result};
use crate::neuralnet::{
    sample_categorical, softmax, softmax_entropy, InputContract, MlpParams, MlpPolicy,
    OptimizerConfig, OptimizerState, PolicyHead, LIDAR_NET_DIMS,
};
use crate::seeding::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgConfig {
    pub total_episodes: u64,
    pub gamma: f64,
    pub lr: f64,
    pub entropy_coef: f64,
    /// Weight of the newest batch in the moving-average return baseline.
    pub baseline_momentum: f64,
    pub episodes_per_update: usize,
    pub grad_clip: f64,
    /// Episodes between goal-rate checks; 0 disables early stopping.
    pub eval_interval: u64,
    pub success_rate: f64,
    /// No early stop before this many episodes. A near-uniform policy already
    /// reaches the goal from most cells, so by default training runs to the end.
    pub min_episodes: u64,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self {
            total_episodes: 100_000,
            gamma: 0.95,
            lr: 1e-3,
            entropy_coef: 0.01,
            baseline_momentum: 0.05,
            episodes_per_update: 8,
            grad_clip: 10.0,
            eval_interval: 5_000,
            success_rate: 0.95,
            min_episodes: 100_000,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.entropy_coef < 0.0 {
            return config("entropy_coef must be non-negative");
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(self.lr > 0.0) {
            return config("gamma must lie in (0, 1] and lr must be positive");
        }
        if self.episodes_per_update == 0 || !(0.0..=1.0).contains(&self.baseline_momentum) {
            return config("episodes_per_update must be positive and baseline_momentum in [0, 1]");
        }
        Ok(())
    }
}

pub(crate) struct Episode<A> {
    pub obs: Vec<Vec<f64>>,
    pub actions: Vec<A>,
    pub rewards: Vec<f64>,
}

pub(crate) fn discounted_returns(rewards: &[f64], gamma: f64) -> Vec<f64> {
    let mut out = vec![0.0; rewards.len()];
    let mut acc = 0.0;
    for (i, r) in rewards.iter().enumerate().rev() {
        acc = r + gamma * acc;
        out[i] = acc;
    }
    out
}

/// Moving-average baseline of the episodic (discounted, from the start) return.
#[derive(Debug, Clone, Copy)]
pub(crate) struct ReturnBaseline {
    value: Option<f64>,
    momentum: f64,
}

impl ReturnBaseline {
    pub fn new(momentum: f64) -> Self {
        Self { value: None, momentum }
    }

    pub fn get(&self) -> f64 {
        self.value.unwrap_or(0.0)
    }

    pub fn update(&mut self, batch_mean: f64) {
        self.value = Some(match self.value {
            None => batch_mean,
            Some(v) => v + self.momentum * (batch_mean - v),
        });
    }
}

/// Gradient of `-(advantage · log π(action) + entropy_coef · H(π))` with respect to the logits.
pub(crate) fn reinforce_logit_grad(logits: &[f64], action: usize, advantage: f64, entropy_coef: f64) -> Vec<f64> {
    let p = softmax(logits);
    let (_, dh) = softmax_entropy(logits);
    p.iter()
        .zip(&dh)
        .enumerate()
        .map(|(j, (pj, dhj))| {
            let onehot = if j == action { 1.0 } else { 0.0 };
            -advantage * (onehot - pj) - entropy_coef * dhj
        })
        .collect()
}

/// REINFORCE with a moving-average baseline and an entropy bonus on a grid
/// world, producing a softmax policy.
pub fn train_pg(
    env: &GridEnv,
    cfg: &PgConfig,
    seed: u64,
    mut log: Option<&mut dyn Write>,
) -> Result<MlpPolicy> {
    cfg.validate()?;
    let params = MlpParams::init(&LIDAR_NET_DIMS, &mut stream(seed, "pg_init", 0))?;
    let mut policy = MlpPolicy::new(params, PolicyHead::Logits, InputContract::Lidar)?;
    let mut opt = OptimizerState::new(OptimizerConfig::adam(cfg.lr), policy.params.as_slice().len());
    let mut rng = stream(seed, "pg_act", 0);
    let mut env = env.clone();
    let mut baseline = ReturnBaseline::new(cfg.baseline_momentum);

    let mut done_episodes = 0u64;
    let mut next_eval = cfg.eval_interval;
    while done_episodes < cfg.total_episodes {
        let n = (cfg.episodes_per_update as u64).min(cfg.total_episodes - done_episodes);
        let mut episodes = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut obs = env.reset(derive_seed(seed, "pg_episode", done_episodes));
            done_episodes += 1;
            let mut ep = Episode { obs: vec![], actions: vec![], rewards: vec![] };
            loop {
                let p = policy.action_distribution(&obs)?;
                let a = sample_categorical(&p, &mut rng);
                let s = env.step(a)?;
                ep.obs.push(obs);
                ep.actions.push(a);
                ep.rewards.push(s.reward);
                if s.done() {
                    break;
                }
                obs = s.obs;
            }
            episodes.push(ep);
        }

        let b = baseline.get();
        let mut grads = policy.params.zeros_like();
        let total_steps: usize = episodes.iter().map(|e| e.rewards.len()).sum();
        let mut start_returns = 0.0;
        for ep in &episodes {
            let returns = discounted_returns(&ep.rewards, cfg.gamma);
            start_returns += returns[0];
            for ((obs, &a), g) in ep.obs.iter().zip(&ep.actions).zip(&returns) {
                let trace = policy.params.forward_trace(obs)?;
                let mut upstream = reinforce_logit_grad(trace.output(), a, g - b, cfg.entropy_coef);
                for u in &mut upstream {
                    *u /= total_steps as f64;
                }
                policy.params.accumulate_backward(&trace, &upstream, &mut grads)?;
            }
        }
        baseline.update(start_returns / episodes.len() as f64);
        clip_grad_norm(grads.as_mut_slice(), cfg.grad_clip);
        opt.step(policy.params.as_mut_slice(), grads.as_slice())?;

        if cfg.eval_interval > 0 && done_episodes >= next_eval {
            next_eval += cfg.eval_interval;
            let eval = goal_eval(&policy, &env, derive_seed(seed, "pg_eval", done_episodes))?;
            if let Some(w) = log.as_deref_mut() {
                writeln!(
                    w,
                    "episode={} baseline={:.4} goal_rate={:.4} mean_eval_return={:.4}",
                    done_episodes,
                    baseline.get(),
                    eval.rate,
                    eval.mean_return
                )?;
            }
            if eval.rate >= cfg.success_rate && done_episodes >= cfg.min_episodes {
                break;
            }
        }
    }
    Ok(policy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discounted_returns_accumulate_backwards() {
        let g = discounted_returns(&[0.0, 0.0, 1.0], 0.5);
        assert_eq!(g, vec![0.25, 0.5, 1.0]);
    }

    #[test]
    fn baseline_starts_at_first_batch() {
        let mut b = ReturnBaseline::new(0.5);
        assert_eq!(b.get(), 0.0);
        b.update(2.0);
        assert_eq!(b.get(), 2.0);
        b.update(4.0);
        assert_eq!(b.get(), 3.0);
    }
}
