use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::random::SearchOutcome;
use crate::error::{config, Result};
use crate::ga_attack::{Fitness, MapGenome, SearchSpace};
use crate::gridworld::{is_valid, GridMap};
use crate::seeding::stream;
use crate::trainers::{DqnConfig, DqnLearner, Transition};

/// Per-step reward of the flip search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipReward {
    /// Fitness of the map after the step.
    Absolute,
    /// Change in fitness caused by the step.
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RlSearchConfig {
    pub total_steps: u64,
    pub episode_limit: u64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub eps_decay_end_step: u64,
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub lr: f64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub target_sync_interval: u64,
    pub learning_starts: u64,
    /// Environment steps per gradient update.
    pub train_interval: u64,
    pub grad_clip: f64,
    pub reward: FlipReward,
    pub seed: u64,
}

impl Default for RlSearchConfig {
    fn default() -> Self {
        Self {
            total_steps: 250_000,
            episode_limit: 100,
            eps_start: 1.0,
            eps_end: 0.02,
            eps_decay_end_step: 240_000,
            hidden: vec![64, 64],
            gamma: 0.9,
            lr: 1e-3,
            replay_capacity: 10_000,
            batch_size: 32,
            target_sync_interval: 500,
            learning_starts: 1_000,
            train_interval: 4,
            grad_clip: 10.0,
            reward: FlipReward::Absolute,
            seed: 0,
        }
    }
}

impl RlSearchConfig {
    /// Same schedule shape with `steps` total steps (decay over the first 96%).
    pub fn with_steps(steps: u64) -> Self {
        Self {
            total_steps: steps,
            eps_decay_end_step: steps * 24 / 25,
            ..Self::default()
        }
    }

    fn dqn(&self) -> DqnConfig {
        DqnConfig {
            total_steps: self.total_steps,
            eps_start: self.eps_start,
            eps_end: self.eps_end,
            eps_decay_end_step: self.eps_decay_end_step,
            replay_capacity: self.replay_capacity,
            batch_size: self.batch_size,
            target_sync_interval: self.target_sync_interval,
            gamma: self.gamma,
            lr: self.lr,
            learning_starts: self.learning_starts,
            grad_clip: self.grad_clip,
            eval_interval: 0,
            success_rate: 1.0,
            min_steps: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 || self.episode_limit == 0 || self.train_interval == 0 {
            return config("total_steps, episode_limit and train_interval must be positive");
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return config("hidden layer widths must be positive");
        }
        self.dqn().validate()
    }

    /// Network dims for a map of `cells` cells: state and action sizes both equal `cells`.
    pub fn dims(&self, cells: usize) -> Vec<usize> {
        let mut d = vec![cells];
        d.extend(&self.hidden);
        d.push(cells);
        d
    }
}

fn features(g: &MapGenome) -> Vec<f64> {
    g.bits.iter().map(|&b| b as f64).collect()
}

/// DQN over single-cell edits of a guessed map. Each action flips one cell
/// (the goal cell is a no-op); a flip that breaks the constraints is undone
/// and earns 0. Rewards are divided by the cell count to keep Q-values O(1).
/// Returns the best valid map seen at any step.
pub fn rl_search(fitness: &Fitness<'_>, space: &SearchSpace, cfg: &RlSearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    space.validate()?;
    let started = Instant::now();
    let evals_before = fitness.evaluations();
    let cells = space.len();
    let scale = 1.0 / cells as f64;
    let dqn = cfg.dqn();
    let schedule = dqn.schedule();
    let mut learner = DqnLearner::new(&cfg.dims(cells), &dqn, &mut stream(cfg.seed, "rl_search_init", 0))?;
    let mut act_rng = stream(cfg.seed, "rl_search_act", 0);
    let mut learn_rng = stream(cfg.seed, "rl_search_replay", 0);

    let to_map = |g: &MapGenome| -> Result<GridMap> { g.to_map(space.width, space.height) };
    let mut episode = 0u64;
    let mut genome = space.random_genome(&mut stream(cfg.seed, "rl_search_reset", episode))?;
    let mut score = fitness.score(&to_map(&genome)?)?;
    let mut best = (to_map(&genome)?, score);
    let mut episode_steps = 0u64;

    for t in 0..cfg.total_steps {
        let obs = features(&genome);
        let action = learner.epsilon_greedy(&obs, schedule.value(t), &mut act_rng)?;
        let reward = if action == space.goal {
            match cfg.reward {
                FlipReward::Absolute => score,
                FlipReward::Delta => 0.0,
            }
        } else {
            let mut next = genome.clone();
            next.bits[action] ^= 1;
            let map = to_map(&next)?;
            if is_valid(&map) {
                let next_score = fitness.score(&map)?;
                let r = match cfg.reward {
                    FlipReward::Absolute => next_score,
                    FlipReward::Delta => next_score - score,
                };
                if next_score > best.1 {
                    best = (map, next_score);
                }
                genome = next;
                score = next_score;
                r
            } else {
                0.0
            }
        };
        episode_steps += 1;
        learner.record(Transition {
            obs,
            action,
            reward: reward * scale,
            next_obs: features(&genome),
            terminal: false,
        });
        if t >= cfg.learning_starts && t % cfg.train_interval == 0 {
            learner.train_step(&mut learn_rng)?;
        }
        if (t + 1) % cfg.target_sync_interval == 0 {
            learner.sync_target();
        }
        if episode_steps >= cfg.episode_limit && t + 1 < cfg.total_steps {
            episode += 1;
            episode_steps = 0;
            genome = space.random_genome(&mut stream(cfg.seed, "rl_search_reset", episode))?;
            score = fitness.score(&to_map(&genome)?)?;
            if score > best.1 {
                best = (to_map(&genome)?, score);
            }
        }
    }
    Ok(SearchOutcome {
        best: best.0,
        best_score: best.1,
        evaluations: fitness.evaluations() - evals_before,
        seconds: started.elapsed().as_secs_f64(),
    })
}
