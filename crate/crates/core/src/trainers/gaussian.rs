use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dqn::clip_grad_norm;
use super::env::{Episodic, PointBotEnv};
use super::pg::{discounted_returns, Episode, ReturnBaseline};
use crate::env_families::OBS_DIM;
use crate::error::{config, Result};
use crate::neuralnet::{InputContract, MlpParams, MlpPolicy, OptimizerAlgo, OptimizerConfig, OptimizerState, PolicyHead};
use crate::seeding::{derive_seed, stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianPgConfig {
    pub total_episodes: u64,
    pub gamma: f64,
    pub lr: f64,
    pub hidden: Vec<usize>,
    pub log_std_init: f64,
    pub min_log_std: f64,
    pub baseline_momentum: f64,
    pub episodes_per_update: usize,
    pub grad_clip: f64,
    /// Start the mean head at exactly zero so every policy begins from the
    /// same action distribution.
    pub zero_init_output: bool,
    /// Plain SGD keeps the size of each update proportional to the reward
    /// scale of the training dynamics; Adam normalizes that away.
    pub optimizer: OptimizerAlgo,
}

impl Default for GaussianPgConfig {
    fn default() -> Self {
        Self {
            total_episodes: 800,
            gamma: 0.99,
            lr: 0.01,
            hidden: vec![],
            log_std_init: -3.0,
            min_log_std: -5.0,
            baseline_momentum: 0.1,
            episodes_per_update: 16,
            grad_clip: 1000.0,
            zero_init_output: true,
            optimizer: OptimizerAlgo::Sgd,
        }
    }
}

impl GaussianPgConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) || !(self.lr > 0.0) {
            return config("gamma must lie in (0, 1] and lr must be positive");
        }
        if self.episodes_per_update == 0 || self.hidden.contains(&0) {
            return config("episodes_per_update and hidden widths must be positive");
        }
        Ok(())
    }

    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![OBS_DIM];
        dims.extend(&self.hidden);
        dims.push(1);
        dims
    }
}

/// REINFORCE with a moving-average baseline for a Gaussian policy whose mean
/// is an MLP of the observation and whose log std is a single learned scalar.
pub fn train_gaussian_pg(
    env: &PointBotEnv,
    cfg: &GaussianPgConfig,
    seed: u64,
    mut log: Option<&mut dyn Write>,
) -> Result<MlpPolicy> {
    cfg.validate()?;
    let mut params = MlpParams::init(&cfg.dims(), &mut stream(seed, "gpg_init", 0))?;
    if cfg.zero_init_output {
        let (w, b) = params.layer_mut(params.num_layers() - 1);
        w.fill(0.0);
        b.fill(0.0);
    }
    let mut log_std = cfg.log_std_init;
    let mut policy = MlpPolicy::new(params, PolicyHead::Gaussian { log_std }, InputContract::PointBot)?;
    let opt_cfg = OptimizerConfig { algo: cfg.optimizer, ..OptimizerConfig::adam(cfg.lr) };
    let mut opt = OptimizerState::new(opt_cfg, policy.params.as_slice().len());
    let mut std_opt = OptimizerState::new(opt_cfg, 1);
    let mut rng = stream(seed, "gpg_act", 0);
    let mut env = env.clone();
    let mut baseline = ReturnBaseline::new(cfg.baseline_momentum);

    let mut done_episodes = 0u64;
    while done_episodes < cfg.total_episodes {
        let n = (cfg.episodes_per_update as u64).min(cfg.total_episodes - done_episodes);
        let mut episodes: Vec<Episode<f64>> = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let mut obs = env.reset(derive_seed(seed, "gpg_episode", done_episodes));
            done_episodes += 1;
            let mut ep = Episode { obs: vec![], actions: vec![], rewards: vec![] };
            loop {
                let a = policy.act_continuous(&obs, &mut rng)?;
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
        let sigma2 = (2.0 * log_std).exp();
        let total_steps: usize = episodes.iter().map(|e| e.rewards.len()).sum();
        let scale = 1.0 / total_steps as f64;
        let mut grads = policy.params.zeros_like();
        let mut grad_log_std = 0.0;
        let mut start_returns = 0.0;
        for ep in &episodes {
            let returns = discounted_returns(&ep.rewards, cfg.gamma);
            start_returns += returns[0];
            for ((obs, &a), g) in ep.obs.iter().zip(&ep.actions).zip(&returns) {
                let adv = g - b;
                let trace = policy.params.forward_trace(obs)?;
                let diff = a - trace.output()[0];
                // d/dmu log N(a; mu, sigma) = (a - mu) / sigma^2
                let upstream = [-adv * diff / sigma2 * scale];
                policy.params.accumulate_backward(&trace, &upstream, &mut grads)?;
                // d/dlog_sigma log N = (a - mu)^2 / sigma^2 - 1
                grad_log_std += -adv * (diff * diff / sigma2 - 1.0) * scale;
            }
        }
        baseline.update(start_returns / episodes.len() as f64);
        clip_grad_norm(grads.as_mut_slice(), cfg.grad_clip);
        opt.step(policy.params.as_mut_slice(), grads.as_slice())?;
        let mut ls = [log_std];
        std_opt.step(&mut ls, &[grad_log_std.clamp(-cfg.grad_clip, cfg.grad_clip)])?;
        log_std = ls[0].max(cfg.min_log_std);
        policy.head = PolicyHead::Gaussian { log_std };

        if let Some(w) = log.as_deref_mut() {
            writeln!(
                w,
                "episode={} baseline={:.4} log_std={:.4}",
                done_episodes,
                baseline.get(),
                log_std
            )?;
        }
    }
    Ok(policy)
}
