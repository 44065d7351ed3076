use std::sync::atomic::{AtomicU64, Ordering};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gridworld::{
    argmax, boltzmann_row, is_valid, lidar_unchecked, value_iteration, GridAction, GridMap,
    LidarObservation, MdpSpec, DEFAULT_VI_TOLERANCE,
};
use crate::neuralnet::{MlpPolicy, PolicyHead};
use crate::trainers::{train_dqn, train_pg, DqnConfig, GridEnv, PgConfig};

/// What a black-box target reveals for one observation.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetResponse {
    pub greedy: usize,
    pub probs: [f64; GridAction::COUNT],
}

/// Query-only access to an attacked grid-world policy.
pub trait TargetPolicy: Sync {
    fn query(&self, obs: &LidarObservation) -> Result<TargetResponse>;
}

impl TargetPolicy for MlpPolicy {
    fn query(&self, obs: &LidarObservation) -> Result<TargetResponse> {
        let features = obs.to_features();
        let dist = self.action_distribution(&features)?;
        if dist.len() != GridAction::COUNT {
            return Err(Error::Shape(format!(
                "target policy has {} actions, grid world needs {}",
                dist.len(),
                GridAction::COUNT
            )));
        }
        let greedy = match self.head {
            PolicyHead::Logits => argmax(&dist),
            _ => self.greedy_action(&features)?,
        };
        Ok(TargetResponse {
            greedy,
            probs: dist.try_into().unwrap(),
        })
    }
}

/// Per-state agreement metric between target and candidate-optimal policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeltaKind {
    /// 1 iff the greedy actions are equal.
    ExactAction,
    /// 1 iff the L2 distance of the action distributions is below `epsilon`.
    L2Threshold,
}

/// Treatment of actions that tie for the optimal Q-value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TieRule {
    /// The oracle picks the lowest-index optimal action; its Boltzmann
    /// distribution splits mass evenly among tied actions.
    LowestIndex,
    /// Any optimal action agrees, and for L2 the oracle's tied mass may be
    /// split in whatever proportion the target uses.
    AnyOptimal,
}

/// How the candidate map's optimal policy is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Exact Q* by value iteration; stochastic comparisons use a Boltzmann
    /// distribution over Q* at `temperature`.
    ValueIteration { temperature: f64 },
    /// Train an agent on each candidate map (slow).
    TrainedDqn { config: DqnConfig, seed: u64 },
    TrainedPg { config: PgConfig, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessConfig {
    pub delta: DeltaKind,
    pub epsilon: f64,
    pub oracle: OracleKind,
    /// Divide the score by the number of scored states.
    pub normalize: bool,
    pub ties: TieRule,
    pub mdp: MdpSpec,
    pub vi_tolerance: f64,
}

/// The two target agent types the attack distinguishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Dqn,
    Pg,
}

impl AgentKind {
    pub fn title(self) -> &'static str {
        match self {
            AgentKind::Dqn => "DQN",
            AgentKind::Pg => "PG",
        }
    }

    /// The head a trained policy of this kind must carry.
    pub fn head_name(self) -> &'static str {
        match self {
            AgentKind::Dqn => "qvalues",
            AgentKind::Pg => "logits",
        }
    }
}

impl std::str::FromStr for AgentKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dqn" => Ok(AgentKind::Dqn),
            "pg" => Ok(AgentKind::Pg),
            other => Err(crate::error::Error::Config(format!("unknown agent kind {other:?} (dqn|pg)"))),
        }
    }
}

impl FitnessConfig {
    pub fn for_agent(kind: AgentKind) -> Self {
        match kind {
            AgentKind::Dqn => Self::deterministic(),
            AgentKind::Pg => Self::stochastic(),
        }
    }

    /// Exact-action agreement, for deterministic (DQN) targets.
    pub fn deterministic() -> Self {
        Self {
            delta: DeltaKind::ExactAction,
            epsilon: 0.02,
            oracle: OracleKind::ValueIteration { temperature: DEFAULT_TEMPERATURE },
            normalize: false,
            ties: TieRule::AnyOptimal,
            mdp: MdpSpec::default(),
            vi_tolerance: DEFAULT_VI_TOLERANCE,
        }
    }

    /// L2 agreement of action distributions with ε = 0.02, for stochastic (PG) targets.
    pub fn stochastic() -> Self {
        Self {
            delta: DeltaKind::L2Threshold,
            ..Self::deterministic()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta == DeltaKind::L2Threshold && !(self.epsilon > 0.0) {
            return domain("L2 threshold epsilon must be positive");
        }
        if let OracleKind::ValueIteration { temperature } = self.oracle {
            if !(temperature > 0.0) {
                return domain("Boltzmann temperature must be positive");
            }
        }
        self.mdp.validate()
    }
}

pub const DEFAULT_TEMPERATURE: f64 = 0.005;

/// The policy-agreement score of candidate maps against one target.
///
/// The scored states are all free cells of the candidate, goal included.
/// Target responses are memoized per LiDAR observation and evaluation calls
/// are counted.
pub struct Fitness<'a> {
    target: &'a dyn TargetPolicy,
    cfg: FitnessConfig,
    cache: DashMap<u64, TargetResponse>,
    evaluations: AtomicU64,
}

impl<'a> Fitness<'a> {
    pub fn new(target: &'a dyn TargetPolicy, cfg: FitnessConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            target,
            cfg,
            cache: DashMap::new(),
            evaluations: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &FitnessConfig {
        &self.cfg
    }

    /// Number of [`Fitness::score`] calls so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations.load(Ordering::Relaxed)
    }

    fn respond(&self, obs: LidarObservation) -> Result<TargetResponse> {
        let key = obs.key();
        if let Some(r) = self.cache.get(&key) {
            return Ok(r.clone());
        }
        let r = self.target.query(&obs)?;
        self.cache.insert(key, r.clone());
        Ok(r)
    }

    /// Agreement indicator for one state.
    fn agrees(&self, target: &TargetResponse, oracle: &OracleRow) -> bool {
        let any = self.cfg.ties == TieRule::AnyOptimal;
        match self.cfg.delta {
            DeltaKind::ExactAction => {
                if any {
                    oracle.optimal[target.greedy]
                } else {
                    target.greedy == oracle.response.greedy
                }
            }
            DeltaKind::L2Threshold => {
                let reference = if any {
                    reshare_ties(&oracle.response.probs, &oracle.optimal, &target.probs)
                } else {
                    oracle.response.probs
                };
                l2(&target.probs, &reference) < self.cfg.epsilon
            }
        }
    }

    pub fn score(&self, candidate: &GridMap) -> Result<f64> {
        if !is_valid(candidate) {
            return domain("fitness of a map violating the floor-plan constraints");
        }
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let oracle = self.oracle_distributions(candidate)?;
        let mut score = 0.0;
        let mut states = 0usize;
        for (cell, oracle_row) in oracle {
            states += 1;
            let r = self.respond(lidar_unchecked(candidate, cell))?;
            if self.agrees(&r, &oracle_row) {
                score += 1.0;
            }
        }
        if self.cfg.normalize && states > 0 {
            score /= states as f64;
        }
        Ok(score)
    }

    fn oracle_distributions(&self, map: &GridMap) -> Result<Vec<(usize, OracleRow)>> {
        let starts = map.free_cells();
        match &self.cfg.oracle {
            OracleKind::ValueIteration { temperature } => {
                let q = value_iteration(map, &self.cfg.mdp, self.cfg.vi_tolerance);
                Ok(starts
                    .into_iter()
                    .map(|cell| {
                        let row = q.row(cell).unwrap();
                        (
                            cell,
                            OracleRow {
                                response: TargetResponse {
                                    greedy: argmax(row),
                                    probs: boltzmann_row(row, *temperature),
                                },
                                optimal: optimal_mask(row),
                            },
                        )
                    })
                    .collect())
            }
            OracleKind::TrainedDqn { config, seed } => {
                let env = GridEnv::new(map.clone(), self.cfg.mdp)?;
                let agent = train_dqn(&env, config, *seed, None)?;
                trained_rows(&agent, map, starts)
            }
            OracleKind::TrainedPg { config, seed } => {
                let env = GridEnv::new(map.clone(), self.cfg.mdp)?;
                let agent = train_pg(&env, config, *seed, None)?;
                trained_rows(&agent, map, starts)
            }
        }
    }
}

struct OracleRow {
    response: TargetResponse,
    optimal: [bool; GridAction::COUNT],
}

/// Values within this distance of the maximum count as tied.
const TIE_TOLERANCE: f64 = 1e-6;

fn optimal_mask(q: &[f64; GridAction::COUNT]) -> [bool; GridAction::COUNT] {
    let best = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    q.map(|v| v >= best - TIE_TOLERANCE)
}

fn trained_rows(agent: &MlpPolicy, map: &GridMap, starts: Vec<usize>) -> Result<Vec<(usize, OracleRow)>> {
    starts
        .into_iter()
        .map(|cell| {
            let response = agent.query(&lidar_unchecked(map, cell))?;
            let mut optimal = [false; GridAction::COUNT];
            optimal[response.greedy] = true;
            Ok((cell, OracleRow { response, optimal }))
        })
        .collect()
}

/// The oracle distribution with its mass on tied-optimal actions
/// redistributed in the target's proportions (evenly if the target puts
/// no mass there).
fn reshare_ties(
    oracle: &[f64; GridAction::COUNT],
    optimal: &[bool; GridAction::COUNT],
    target: &[f64; GridAction::COUNT],
) -> [f64; GridAction::COUNT] {
    let tied = optimal.iter().filter(|&&o| o).count();
    if tied < 2 {
        return *oracle;
    }
    let mass: f64 = (0..GridAction::COUNT).filter(|&a| optimal[a]).map(|a| oracle[a]).sum();
    let target_mass: f64 = (0..GridAction::COUNT).filter(|&a| optimal[a]).map(|a| target[a]).sum();
    let mut out = *oracle;
    for a in 0..GridAction::COUNT {
        if optimal[a] {
            out[a] = if target_mass > 0.0 {
                mass * target[a] / target_mass
            } else {
                mass / tied as f64
            };
        }
    }
    out
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// A target that acts greedily on a fixed Q-table, keyed by observation.
/// Handy as a perfectly-trained stand-in.
pub struct OracleTarget {
    responses: std::collections::HashMap<u64, TargetResponse>,
    fallback: TargetResponse,
}

impl OracleTarget {
    /// Greedy (or Boltzmann, if `temperature` is given) policy of `map`'s Q*.
    /// Cells sharing a LiDAR reading keep the first cell's response.
    pub fn from_map(map: &GridMap, mdp: &MdpSpec, temperature: Option<f64>) -> Self {
        let q = value_iteration(map, mdp, DEFAULT_VI_TOLERANCE);
        let mut responses = std::collections::HashMap::new();
        for cell in map.free_cells() {
            let row = q.row(cell).unwrap();
            let probs = match temperature {
                Some(t) => boltzmann_row(row, t),
                None => {
                    let mut p = [0.0; GridAction::COUNT];
                    p[argmax(row)] = 1.0;
                    p
                }
            };
            responses
                .entry(lidar_unchecked(map, cell).key())
                .or_insert(TargetResponse { greedy: argmax(row), probs });
        }
        Self {
            responses,
            fallback: TargetResponse {
                greedy: GridAction::Stay.index(),
                probs: [0.0, 0.0, 0.0, 0.0, 1.0],
            },
        }
    }
}

impl TargetPolicy for OracleTarget {
    fn query(&self, obs: &LidarObservation) -> Result<TargetResponse> {
        Ok(self.responses.get(&obs.key()).unwrap_or(&self.fallback).clone())
    }
}
