//! Parametrized families of candidate environments: a slippery grid world
//! and a 1-d point-mass robot.

mod candidates;
mod pointbot;
mod slipgrid;

pub use candidates::{
    builtin_candidate_set, pointbot_set, slipgrid_set, CandidateSet, DynamicsCandidate, Family,
    FamilyParams, BUILTIN_SETS, CANDIDATES_SCHEMA_VERSION, SLIPGRID_MAP,
};
pub use pointbot::{
    pointbot_step, PointBotParams, PointBotState, PointBotStep, CONTROL_COST, DT, GOAL_X,
    HORIZON, OBS_DIM, SUCCESS_BONUS,
};
pub use slipgrid::{slipgrid_step, SlipGridParams};
