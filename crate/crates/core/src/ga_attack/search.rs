use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fitness::{Fitness, FitnessConfig, TargetPolicy};
use super::genome::{mutate, recovery_rate, tournament_select, two_point_crossover, MapGenome, SearchSpace};
use crate::error::{domain, Error, Result};
use crate::gridworld::{is_valid, GridMap};
use crate::seeding::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub elite_size: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub seed: u64,
    pub max_child_retries: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 64,
            elite_size: 8,
            generations: 150,
            mutation_rate: 0.05,
            seed: 0,
            max_child_retries: 50,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.elite_size == 0 || self.elite_size >= self.population_size {
            return domain("elite size must satisfy 0 < n < L");
        }
        if !(0.0..=1.0).contains(&self.mutation_rate) {
            return domain("mutation rate must lie in [0, 1]");
        }
        if self.max_child_retries == 0 {
            return domain("max_child_retries must be at least 1");
        }
        Ok(())
    }

    /// Fitness evaluations one run performs.
    pub fn evaluations(&self) -> usize {
        self.population_size + self.generations * (self.population_size - self.elite_size)
    }
}

/// Per-generation population statistics; entry `g` describes the population
/// scored at generation `g`, with the final population last.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaHistory {
    pub mean_fitness: Vec<f64>,
    pub best_fitness: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_recovery: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_recovery: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub seed: u64,
    pub best: GridMap,
    pub best_score: f64,
    pub recovery: Option<f64>,
    pub history: GaHistory,
    pub evaluations: u64,
    /// Children replaced by fresh random maps after exhausting their retries.
    pub fallback_children: usize,
    pub seconds: f64,
}

/// Runs the genetic search against `target`. `truth`, when given, is used
/// only to fill the recovery columns of the history.
pub fn ga_search(
    target: &dyn TargetPolicy,
    cfg: &GaConfig,
    space: &SearchSpace,
    fitness_cfg: &FitnessConfig,
    truth: Option<&GridMap>,
) -> Result<GaOutcome> {
    let fitness = Fitness::new(target, fitness_cfg.clone())?;
    ga_search_with(&fitness, cfg, space, truth)
}

/// [`ga_search`] with a shared fitness instance (and its response cache).
pub fn ga_search_with(
    fitness: &Fitness<'_>,
    cfg: &GaConfig,
    space: &SearchSpace,
    truth: Option<&GridMap>,
) -> Result<GaOutcome> {
    cfg.validate()?;
    space.validate()?;
    if let Some(t) = truth {
        if SearchSpace::of_map(t).len() != space.len() || t.goal() != space.goal || t.width() != space.width {
            return Err(Error::Shape("ground-truth map does not match the search space".into()));
        }
    }
    let started = Instant::now();
    let evals_before = fitness.evaluations();
    let l = cfg.population_size;

    let mut population: Vec<MapGenome> = (0..l)
        .into_par_iter()
        .map(|i| space.random_genome(&mut stream(cfg.seed, "ga_init", i as u64)))
        .collect::<Result<_>>()?;
    let mut scores = score_all(fitness, space, &population)?;
    let mut history = GaHistory::default();
    if truth.is_some() {
        history.mean_recovery = Some(Vec::new());
        history.best_recovery = Some(Vec::new());
    }
    let mut fallback_children = 0;

    for generation in 0..=cfg.generations {
        // Rank: higher score first, lower index on ties.
        let mut order: Vec<usize> = (0..l).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        population = order.iter().map(|&i| population[i].clone()).collect();
        scores = order.iter().map(|&i| scores[i]).collect();
        record(&mut history, space, &population, &scores, truth)?;
        if generation == cfg.generations {
            break;
        }

        let children: Vec<(MapGenome, bool)> = (cfg.elite_size..l)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(cfg.seed, "ga_child", (generation * l + k) as u64);
                for _ in 0..cfg.max_child_retries {
                    let a = tournament_select(&scores, &mut rng)?;
                    let b = tournament_select(&scores, &mut rng)?;
                    let child = two_point_crossover(&population[a], &population[b], &mut rng)?;
                    let child = mutate(&child, cfg.mutation_rate, &mut rng)?;
                    if is_valid(&child.to_map(space.width, space.height)?) {
                        return Ok((child, false));
                    }
                }
                Ok((space.random_genome(&mut rng)?, true))
            })
            .collect::<Result<_>>()?;
        fallback_children += children.iter().filter(|c| c.1).count();
        let children: Vec<MapGenome> = children.into_iter().map(|c| c.0).collect();
        let child_scores = score_all(fitness, space, &children)?;

        population.truncate(cfg.elite_size);
        scores.truncate(cfg.elite_size);
        population.extend(children);
        scores.extend(child_scores);
    }

    let best = population[0].to_map(space.width, space.height)?;
    let recovery = truth.map(|t| recovery_rate(&best, t)).transpose()?;
    Ok(GaOutcome {
        seed: cfg.seed,
        best,
        best_score: scores[0],
        recovery,
        history,
        evaluations: fitness.evaluations() - evals_before,
        fallback_children,
        seconds: started.elapsed().as_secs_f64(),
    })
}

fn score_all(fitness: &Fitness<'_>, space: &SearchSpace, genomes: &[MapGenome]) -> Result<Vec<f64>> {
    genomes
        .par_iter()
        .map(|g| fitness.score(&g.to_map(space.width, space.height)?))
        .collect()
}

fn record(
    history: &mut GaHistory,
    space: &SearchSpace,
    population: &[MapGenome],
    scores: &[f64],
    truth: Option<&GridMap>,
) -> Result<()> {
    history.mean_fitness.push(scores.iter().sum::<f64>() / scores.len() as f64);
    history.best_fitness.push(scores[0]);
    if let Some(t) = truth {
        let rates = population
            .iter()
            .map(|g| recovery_rate(&g.to_map(space.width, space.height)?, t))
            .collect::<Result<Vec<_>>>()?;
        let mean = rates.iter().sum::<f64>() / rates.len() as f64;
        history.mean_recovery.as_mut().unwrap().push(mean);
        history.best_recovery.as_mut().unwrap().push(rates[0]);
    }
    Ok(())
}

/// Several independent GA runs; the reported result is the highest-scored one
/// (earliest seed on ties).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeedOutcome {
    pub runs: Vec<GaOutcome>,
    pub best_run: usize,
}

impl MultiSeedOutcome {
    pub fn best(&self) -> &GaOutcome {
        &self.runs[self.best_run]
    }
}

pub const DEFAULT_GA_SEEDS: usize = 8;

pub fn ga_multi_seed(
    target: &dyn TargetPolicy,
    cfg: &GaConfig,
    seeds: &[u64],
    space: &SearchSpace,
    fitness_cfg: &FitnessConfig,
    truth: Option<&GridMap>,
) -> Result<MultiSeedOutcome> {
    if seeds.is_empty() {
        return domain("at least one GA seed is required");
    }
    let fitness = Fitness::new(target, fitness_cfg.clone())?;
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let run_cfg = GaConfig { seed, ..cfg.clone() };
        runs.push(ga_search_with(&fitness, &run_cfg, space, truth)?);
    }
    let mut best_run = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.best_score > runs[best_run].best_score {
            best_run = i;
        }
    }
    Ok(MultiSeedOutcome { runs, best_run })
}
