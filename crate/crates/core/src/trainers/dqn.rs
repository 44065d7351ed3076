use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::env::{Episodic, GridEnv};
use super::eval::goal_eval;
use super::replay::{LinearSchedule, ReplayBuffer, Transition};
use crate::error::{config, Result};
use crate::gridworld::argmax;
use crate::neuralnet::{
    InputContract, MlpParams, MlpPolicy, OptimizerConfig, OptimizerState, PolicyHead,
    LIDAR_NET_DIMS,
};
use crate::seeding::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    pub total_steps: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_end_step: u64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub target_sync_interval: u64,
    pub gamma: f64,
    pub lr: f64,
    /// Environment steps collected before the first gradient update.
    pub learning_starts: u64,
    /// Global gradient-norm clip; 0 disables clipping.
    pub grad_clip: f64,
    /// Steps between goal-rate checks; 0 disables early stopping.
    pub eval_interval: u64,
    pub success_rate: f64,
    /// Early stopping is only allowed from this step on.
    pub min_steps: u64,
}

impl Default for DqnConfig {
    fn default() -> Self {
        Self {
            total_steps: 150_000,
            eps_start: 1.0,
            eps_end: 0.02,
            eps_decay_end_step: 100_000,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_interval: 500,
            gamma: 0.95,
            lr: 1e-3,
            learning_starts: 1_000,
            grad_clip: 10.0,
            eval_interval: 5_000,
            success_rate: 0.95,
            min_steps: 0,
        }
    }
}

impl DqnConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_start >= self.eps_end && self.eps_end >= 0.0 && self.eps_start <= 1.0) {
            return config("epsilon schedule needs 1 >= eps_start >= eps_end >= 0");
        }
        if self.eps_decay_end_step > self.total_steps && self.total_steps > 0 {
            return config("eps_decay_end_step exceeds total_steps");
        }
        if self.batch_size == 0 || self.replay_capacity == 0 || self.target_sync_interval == 0 {
            return config("batch size, replay capacity and target sync interval must be positive");
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) || !(self.lr > 0.0) {
            return config("gamma must lie in (0, 1) and lr must be positive");
        }
        Ok(())
    }

    pub fn schedule(&self) -> LinearSchedule {
        LinearSchedule {
            start: self.eps_start,
            end: self.eps_end,
            end_step: self.eps_decay_end_step,
        }
    }
}

/// Online/target Q-networks with a replay buffer: the learning core shared by
/// the grid-world trainer and the flip-search baseline.
#[derive(Debug, Clone)]
pub struct DqnLearner {
    pub online: MlpParams,
    target: MlpParams,
    opt: OptimizerState,
    replay: ReplayBuffer,
    gamma: f64,
    batch_size: usize,
    grad_clip: f64,
}

impl DqnLearner {
    pub fn new<R: Rng + ?Sized>(dims: &[usize], cfg: &DqnConfig, rng: &mut R) -> Result<Self> {
        let online = MlpParams::init(dims, rng)?;
        Ok(Self {
            target: online.clone(),
            opt: OptimizerState::new(OptimizerConfig::adam(cfg.lr), online.as_slice().len()),
            replay: ReplayBuffer::new(cfg.replay_capacity),
            online,
            gamma: cfg.gamma,
            batch_size: cfg.batch_size,
            grad_clip: cfg.grad_clip,
        })
    }

    pub fn greedy(&self, obs: &[f64]) -> Result<usize> {
        Ok(argmax(&self.online.forward(obs)?))
    }

    pub fn epsilon_greedy<R: Rng + ?Sized>(&self, obs: &[f64], eps: f64, rng: &mut R) -> Result<usize> {
        if rng.random::<f64>() < eps {
            Ok(rng.random_range(0..self.online.output_dim()))
        } else {
            self.greedy(obs)
        }
    }

    pub fn record(&mut self, t: Transition) {
        self.replay.push(t);
    }

    pub fn replay(&self) -> &ReplayBuffer {
        &self.replay
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    /// One minibatch update on the squared TD error. Returns the batch loss.
    pub fn train_step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<f64> {
        let batch = self.replay.sample(self.batch_size, rng);
        if batch.is_empty() {
            return Ok(0.0);
        }
        let n = batch.len() as f64;
        let mut grads = self.online.zeros_like();
        let mut loss = 0.0;
        for t in batch {
            let y = if t.terminal {
                t.reward
            } else {
                let next = self.target.forward(&t.next_obs)?;
                t.reward + self.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            let trace = self.online.forward_trace(&t.obs)?;
            let err = trace.output()[t.action] - y;
            loss += err * err / n;
            let mut upstream = vec![0.0; self.online.output_dim()];
            upstream[t.action] = 2.0 * err / n;
            self.online.accumulate_backward(&trace, &upstream, &mut grads)?;
        }
        clip_grad_norm(grads.as_mut_slice(), self.grad_clip);
        self.opt.step(self.online.as_mut_slice(), grads.as_slice())?;
        Ok(loss)
    }
}

pub(crate) fn clip_grad_norm(grads: &mut [f64], max_norm: f64) {
    if max_norm <= 0.0 {
        return;
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grads {
            *g *= scale;
        }
    }
}

/// Trains a LiDAR Q-network agent on a grid world with epsilon-greedy DQN.
///
/// Progress lines (`step`, `epsilon`, goal rate, mean eval return) go to
/// `log` every `eval_interval` steps. Training stops early once the greedy
/// policy reaches the goal from at least `success_rate` of the start cells.
pub fn train_dqn(
    env: &GridEnv,
    cfg: &DqnConfig,
    seed: u64,
    mut log: Option<&mut dyn Write>,
) -> Result<MlpPolicy> {
    cfg.validate()?;
    let mut init_rng = stream(seed, "dqn_init", 0);
    let mut learner = DqnLearner::new(&LIDAR_NET_DIMS, cfg, &mut init_rng)?;
    let mut act_rng = stream(seed, "dqn_act", 0);
    let mut learn_rng = stream(seed, "dqn_replay", 0);
    let mut env = env.clone();
    let schedule = cfg.schedule();
    let policy_of = |p: &MlpParams| MlpPolicy::new(p.clone(), PolicyHead::QValues, InputContract::Lidar);

    let mut episode = 0u64;
    let mut obs = env.reset(derive_seed(seed, "dqn_episode", episode));
    for t in 0..cfg.total_steps {
        let eps = schedule.value(t);
        let action = learner.epsilon_greedy(&obs, eps, &mut act_rng)?;
        let s = env.step(action)?;
        learner.record(Transition {
            obs: std::mem::take(&mut obs),
            action,
            reward: s.reward,
            next_obs: s.obs.clone(),
            terminal: s.terminal,
        });
        obs = if s.done() {
            episode += 1;
            env.reset(derive_seed(seed, "dqn_episode", episode))
        } else {
            s.obs
        };
        if t >= cfg.learning_starts {
            learner.train_step(&mut learn_rng)?;
        }
        if (t + 1) % cfg.target_sync_interval == 0 {
            learner.sync_target();
        }
        if cfg.eval_interval > 0 && (t + 1) % cfg.eval_interval == 0 {
            let eval = goal_eval(&policy_of(&learner.online)?, &env, derive_seed(seed, "dqn_eval", t))?;
            if let Some(w) = log.as_deref_mut() {
                writeln!(
                    w,
                    "step={} epsilon={:.4} goal_rate={:.4} mean_eval_return={:.4}",
                    t + 1,
                    eps,
                    eval.rate,
                    eval.mean_return
                )?;
            }
            if eval.rate >= cfg.success_rate && t + 1 >= cfg.min_steps {
                break;
            }
        }
    }
    policy_of(&learner.online)
}
