use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::env_families::{CandidateSet, DynamicsCandidate, Family};
use crate::error::{domain, Error, Result};
use crate::gridworld::MdpSpec;
use crate::neuralnet::MlpPolicy;
use crate::seeding::derive_seed;
use crate::trainers::{
    evaluate_policy, train_dqn, train_gaussian_pg, train_pg, DqnConfig, FamilyEnv, GaussianPgConfig,
    PgConfig, RewardStats,
};

/// Learner used for shadow policies (and for targets in experiments).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShadowTrainer {
    GaussianPg(GaussianPgConfig),
    Pg(PgConfig),
    Dqn(DqnConfig),
}

impl ShadowTrainer {
    pub fn default_for(family: Family) -> Self {
        match family {
            Family::PointBot => ShadowTrainer::GaussianPg(GaussianPgConfig::default()),
            Family::SlipGrid => ShadowTrainer::Pg(PgConfig {
                total_episodes: 4_000,
                min_episodes: 4_000,
                eval_interval: 0,
                ..PgConfig::default()
            }),
        }
    }

    /// Trains one policy on `candidate`'s dynamics.
    pub fn train(&self, candidate: &DynamicsCandidate, mdp: MdpSpec, seed: u64) -> Result<MlpPolicy> {
        match (self, FamilyEnv::from_candidate(candidate, mdp)?) {
            (ShadowTrainer::GaussianPg(cfg), FamilyEnv::PointBot(env)) => train_gaussian_pg(&env, cfg, seed, None),
            (ShadowTrainer::Pg(cfg), FamilyEnv::Grid(env)) => train_pg(&env, cfg, seed, None),
            (ShadowTrainer::Dqn(cfg), FamilyEnv::Grid(env)) => train_dqn(&env, cfg, seed, None),
            (t, _) => domain(format!(
                "trainer {} does not fit candidate {}",
                t.name(),
                candidate.label
            )),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ShadowTrainer::GaussianPg(_) => "gpg",
            ShadowTrainer::Pg(_) => "pg",
            ShadowTrainer::Dqn(_) => "dqn",
        }
    }

    pub fn title(&self) -> &'static str {
        match self {
            ShadowTrainer::GaussianPg(_) => "Gaussian PG",
            ShadowTrainer::Pg(_) => "PG",
            ShadowTrainer::Dqn(_) => "DQN",
        }
    }
}

/// A trained shadow policy with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowPolicy {
    pub candidate: usize,
    pub seed_index: usize,
    pub seed: u64,
    pub policy: MlpPolicy,
}

/// Training seed of shadow policy (candidate, seed index).
pub fn shadow_seed(root: u64, n_candidates: usize, candidate: usize, seed_index: usize) -> u64 {
    derive_seed(root, "shadow", (seed_index * n_candidates + candidate) as u64)
}

/// Trains `m` policies per candidate, in parallel. Output is ordered by
/// candidate, then seed index.
pub fn train_shadow_policies(
    candidates: &CandidateSet,
    m: usize,
    trainer: &ShadowTrainer,
    mdp: MdpSpec,
    root_seed: u64,
) -> Result<Vec<ShadowPolicy>> {
    train_shadow_subset(candidates, &(0..m).collect::<Vec<_>>(), trainer, mdp, root_seed)
}

/// As [`train_shadow_policies`] for an explicit list of seed indices.
pub fn train_shadow_subset(
    candidates: &CandidateSet,
    seed_indices: &[usize],
    trainer: &ShadowTrainer,
    mdp: MdpSpec,
    root_seed: u64,
) -> Result<Vec<ShadowPolicy>> {
    candidates.validate()?;
    if seed_indices.is_empty() {
        return domain("at least one seed per candidate is required");
    }
    let n = candidates.len();
    let jobs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| seed_indices.iter().map(move |&j| (i, j)))
        .collect();
    jobs.into_par_iter()
        .map(|(i, j)| {
            let seed = shadow_seed(root_seed, n, i, j);
            let policy = trainer
                .train(&candidates.candidates[i], mdp, seed)
                .map_err(|e| Error::Training {
                    candidate: i,
                    seed: j,
                    source: Box::new(e),
                })?;
            Ok(ShadowPolicy {
                candidate: i,
                seed_index: j,
                seed,
                policy,
            })
        })
        .collect()
}

/// A policy's reward signature over a candidate set: `vector` is laid out
/// `[mean_1, var_1, ..., mean_N, var_N]`, `returns[i]` holds the raw trial
/// returns on candidate `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Features {
    pub vector: Vec<f64>,
    pub returns: Vec<Vec<f64>>,
}

pub const DEFAULT_TRIALS: usize = 20;

pub fn extract_features(
    policy: &MlpPolicy,
    candidates: &CandidateSet,
    k: usize,
    mdp: MdpSpec,
    seed: u64,
) -> Result<Features> {
    if k == 0 {
        return domain("feature extraction needs k >= 1 trials");
    }
    let mut vector = Vec::with_capacity(2 * candidates.len());
    let mut returns = Vec::with_capacity(candidates.len());
    for (i, c) in candidates.candidates.iter().enumerate() {
        let env_seed = derive_seed(seed, "features", i as u64);
        let stats: RewardStats = match FamilyEnv::from_candidate(c, mdp)? {
            FamilyEnv::Grid(mut env) => evaluate_policy(policy, &mut env, k, env_seed)?,
            FamilyEnv::PointBot(mut env) => evaluate_policy(policy, &mut env, k, env_seed)?,
        };
        vector.push(stats.mean);
        vector.push(stats.variance);
        returns.push(stats.returns);
    }
    Ok(Features { vector, returns })
}
