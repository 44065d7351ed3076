use rand::Rng;

use crate::env_families::{
    pointbot_step, slipgrid_step, DynamicsCandidate, FamilyParams, PointBotParams, PointBotState,
    SlipGridParams, OBS_DIM,
};
use crate::error::{domain, Error, Result};
use crate::gridworld::{lidar_unchecked, step, GridAction, GridMap, MdpSpec};
use crate::neuralnet::{InputContract, MlpPolicy};
use crate::seeding::{rng_from_seed, Rng as StreamRng};

#[derive(Debug, Clone, PartialEq)]
pub struct EnvStep {
    pub obs: Vec<f64>,
    pub reward: f64,
    /// The episode reached a terminal state (no bootstrapping past it).
    pub terminal: bool,
    /// The episode was cut off by the step limit.
    pub truncated: bool,
}

impl EnvStep {
    pub fn done(&self) -> bool {
        self.terminal || self.truncated
    }
}

/// The episodic interface shared by every environment family.
pub trait Episodic {
    type Action: Copy;

    fn input_contract(&self) -> InputContract;
    fn obs_dim(&self) -> usize;
    fn reset(&mut self, seed: u64) -> Vec<f64>;
    fn step(&mut self, action: Self::Action) -> Result<EnvStep>;

    /// Picks an action for the current observation with `policy`.
    fn select_action<R: Rng + ?Sized>(
        policy: &MlpPolicy,
        obs: &[f64],
        rng: &mut R,
    ) -> Result<Self::Action>;
}

pub fn check_contract<E: Episodic>(policy: &MlpPolicy, env: &E) -> Result<()> {
    if policy.input != env.input_contract() || policy.params.input_dim() != env.obs_dim() {
        return Err(Error::Domain(format!(
            "policy expects {:?} input of size {}, environment provides {:?} of size {}",
            policy.input,
            policy.params.input_dim(),
            env.input_contract(),
            env.obs_dim()
        )));
    }
    Ok(())
}

/// A grid-world episode with LiDAR observations. Optional slip makes it a
/// member of the slippery family.
#[derive(Debug, Clone)]
pub struct GridEnv {
    map: GridMap,
    spec: MdpSpec,
    slip: Option<SlipGridParams>,
    starts: Vec<usize>,
    cell: usize,
    steps: usize,
    rng: StreamRng,
}

impl GridEnv {
    pub fn new(map: GridMap, spec: MdpSpec) -> Result<Self> {
        spec.validate()?;
        if !crate::gridworld::is_valid(&map) {
            return domain("grid environment needs a constraint-valid map");
        }
        let starts = map.start_cells();
        if starts.is_empty() {
            return domain("map has no free cell besides the goal");
        }
        Ok(Self {
            cell: starts[0],
            starts,
            map,
            spec,
            slip: None,
            steps: 0,
            rng: rng_from_seed(0),
        })
    }

    pub fn slippery(params: SlipGridParams, spec: MdpSpec) -> Result<Self> {
        params.validate()?;
        let mut env = Self::new(params.base_map.clone(), spec)?;
        env.slip = Some(params);
        Ok(env)
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn spec(&self) -> &MdpSpec {
        &self.spec
    }

    pub fn start_cells(&self) -> &[usize] {
        &self.starts
    }

    pub fn cell(&self) -> usize {
        self.cell
    }

    pub fn observe(&self, cell: usize) -> Vec<f64> {
        lidar_unchecked(&self.map, cell).to_features().to_vec()
    }

    /// Starts an episode at a given cell.
    pub fn reset_at(&mut self, cell: usize, seed: u64) -> Result<Vec<f64>> {
        if !self.starts.contains(&cell) {
            return domain(format!("cell {cell} is not a valid start cell"));
        }
        self.rng = rng_from_seed(seed);
        self.cell = cell;
        self.steps = 0;
        Ok(self.observe(cell))
    }
}

impl Episodic for GridEnv {
    type Action = usize;

    fn input_contract(&self) -> InputContract {
        InputContract::Lidar
    }

    fn obs_dim(&self) -> usize {
        8
    }

    /// Uniformly random non-goal free start cell.
    fn reset(&mut self, seed: u64) -> Vec<f64> {
        self.rng = rng_from_seed(seed);
        self.cell = self.starts[self.rng.random_range(0..self.starts.len())];
        self.steps = 0;
        self.observe(self.cell)
    }

    fn step(&mut self, action: usize) -> Result<EnvStep> {
        let action = GridAction::from_index(action)
            .ok_or_else(|| Error::Domain(format!("grid action index {action} out of range")))?;
        let out = match &self.slip {
            Some(p) => slipgrid_step(p, &self.spec, self.cell, action, &mut self.rng)?,
            None => step(&self.map, &self.spec, self.cell, action)?,
        };
        self.cell = out.next_cell;
        self.steps += 1;
        Ok(EnvStep {
            obs: self.observe(self.cell),
            reward: out.reward,
            terminal: out.done,
            truncated: !out.done && self.steps >= self.spec.step_limit,
        })
    }

    fn select_action<R: Rng + ?Sized>(policy: &MlpPolicy, obs: &[f64], rng: &mut R) -> Result<usize> {
        policy.act_discrete(obs, rng)
    }
}

#[derive(Debug, Clone)]
pub struct PointBotEnv {
    params: PointBotParams,
    state: PointBotState,
}

impl PointBotEnv {
    pub fn new(params: PointBotParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            state: PointBotState::default(),
        })
    }

    pub fn params(&self) -> &PointBotParams {
        &self.params
    }

    pub fn state(&self) -> PointBotState {
        self.state
    }
}

impl Episodic for PointBotEnv {
    type Action = f64;

    fn input_contract(&self) -> InputContract {
        InputContract::PointBot
    }

    fn obs_dim(&self) -> usize {
        OBS_DIM
    }

    /// The robot always starts at rest at the origin.
    fn reset(&mut self, _seed: u64) -> Vec<f64> {
        self.state = PointBotState::default();
        self.state.observation().to_vec()
    }

    fn step(&mut self, action: f64) -> Result<EnvStep> {
        let out = pointbot_step(&self.params, self.state, action)?;
        self.state = out.state;
        let reached = out.state.x >= crate::env_families::GOAL_X;
        Ok(EnvStep {
            obs: out.state.observation().to_vec(),
            reward: out.reward,
            terminal: reached,
            truncated: out.done && !reached,
        })
    }

    fn select_action<R: Rng + ?Sized>(policy: &MlpPolicy, obs: &[f64], rng: &mut R) -> Result<f64> {
        policy.act_continuous(obs, rng)
    }
}

/// An environment built from a candidate of either family.
#[derive(Debug, Clone)]
pub enum FamilyEnv {
    Grid(GridEnv),
    PointBot(PointBotEnv),
}

impl FamilyEnv {
    pub fn from_candidate(candidate: &DynamicsCandidate, spec: MdpSpec) -> Result<Self> {
        Ok(match &candidate.params {
            FamilyParams::SlipGrid(p) => FamilyEnv::Grid(GridEnv::slippery(p.clone(), spec)?),
            FamilyParams::PointBot(p) => FamilyEnv::PointBot(PointBotEnv::new(*p)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::parse_map;

    #[test]
    fn grid_env_truncates_at_step_limit() {
        let map = parse_map("G..\n...\n...").unwrap();
        let spec = MdpSpec { step_limit: 3, ..MdpSpec::default() };
        let mut env = GridEnv::new(map, spec).unwrap();
        env.reset_at(8, 0).unwrap();
        for i in 0..3 {
            let s = env.step(GridAction::Stay.index()).unwrap();
            assert_eq!(s.truncated, i == 2);
            assert!(!s.terminal);
        }
    }

    #[test]
    fn grid_env_rejects_invalid_maps_and_actions() {
        let split = parse_map("G#.\n.#.\n.#.").unwrap();
        assert!(GridEnv::new(split, MdpSpec::default()).is_err());
        let mut env = GridEnv::new(parse_map("G.").unwrap(), MdpSpec::default()).unwrap();
        env.reset(0);
        assert!(env.step(5).is_err());
        let s = env.step(GridAction::MoveLeft.index()).unwrap();
        assert!(s.terminal);
    }

    #[test]
    fn reset_never_starts_on_goal() {
        let mut env = GridEnv::new(parse_map("G.\n..").unwrap(), MdpSpec::default()).unwrap();
        for seed in 0..50 {
            env.reset(seed);
            assert_ne!(env.cell(), 0);
        }
    }
}
