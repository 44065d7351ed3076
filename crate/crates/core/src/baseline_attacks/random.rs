use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::ga_attack::{Fitness, SearchSpace};
use crate::gridworld::GridMap;
use crate::seeding::stream;

/// How long a search may run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    Evaluations(u64),
    Seconds(f64),
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Budget::Evaluations(0) => domain("search budget must be positive"),
            Budget::Seconds(s) if !(s > 0.0) => domain("search budget must be positive"),
            _ => Ok(()),
        }
    }
}

pub const DEFAULT_RANDOM_BUDGET: Budget = Budget::Evaluations(20_000);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: GridMap,
    pub best_score: f64,
    pub evaluations: u64,
    pub seconds: f64,
}

const CHUNK: u64 = 256;

/// Scores independently drawn valid maps and keeps the best (earliest on
/// ties). Map `i` comes from its own rng stream, so a larger evaluation
/// budget extends, never changes, the sequence of candidates.
pub fn random_search(fitness: &Fitness<'_>, space: &SearchSpace, budget: Budget, seed: u64) -> Result<SearchOutcome> {
    budget.validate()?;
    space.validate()?;
    let started = Instant::now();
    let (limit, deadline) = match budget {
        Budget::Evaluations(n) => (n, None),
        Budget::Seconds(s) => (u64::MAX, Some(Duration::from_secs_f64(s))),
    };
    let mut best: Option<(GridMap, f64)> = None;
    let mut used = 0u64;
    while used < limit {
        let end = (used + CHUNK).min(limit);
        let scored: Vec<(GridMap, f64)> = (used..end)
            .into_par_iter()
            .map(|i| {
                let genome = space.random_genome(&mut stream(seed, "random_search", i))?;
                let map = genome.to_map(space.width, space.height)?;
                let score = fitness.score(&map)?;
                Ok((map, score))
            })
            .collect::<Result<_>>()?;
        for (map, score) in scored {
            if best.as_ref().is_none_or(|b| score > b.1) {
                best = Some((map, score));
            }
        }
        used = end;
        if deadline.is_some_and(|d| started.elapsed() >= d) {
            break;
        }
    }
    let (best, best_score) = best.expect("budget is positive");
    Ok(SearchOutcome {
        best,
        best_score,
        evaluations: used,
        seconds: started.elapsed().as_secs_f64(),
    })
}
