//! The LiDAR grid world: floor plans, constraints, observations,
//! deterministic transitions and an exact value-iteration solver.

mod lidar;
mod map;
mod mdp;
mod solver;

pub use lidar::{lidar, LidarObservation, DIRECTIONS};
pub(crate) use lidar::lidar_unchecked;
pub use map::{
    is_valid, parse_map, random_map, render_map, render_rows, validate_constraints,
    ConstraintReport, GridMap,
};
pub use mdp::{step, GridAction, MdpSpec, StepResult};
pub use solver::{
    argmax, bellman_residual, boltzmann_policy, boltzmann_row, value_iteration, QTable,
};

pub const DEFAULT_VI_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_DENSITY: f64 = 0.3;
