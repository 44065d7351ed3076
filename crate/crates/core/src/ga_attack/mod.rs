//! Genetic search for a hidden floor plan, scored by how well a candidate
//! map's optimal policy matches the queried target policy.

mod fitness;
mod genome;
mod search;

pub use fitness::{
    AgentKind, DeltaKind, Fitness, FitnessConfig, OracleKind, OracleTarget, TargetPolicy, TargetResponse, TieRule,
    DEFAULT_TEMPERATURE,
};
pub use genome::{
    crossover_at, mutate, recovery_rate, tournament_select, two_point_crossover, MapGenome,
    SearchSpace,
};
pub use search::{
    ga_multi_seed, ga_search, ga_search_with, GaConfig, GaHistory, GaOutcome, MultiSeedOutcome,
    DEFAULT_GA_SEEDS,
};
