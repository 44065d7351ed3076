use serde::{Deserialize, Serialize};

use super::GridMap;
use crate::error::{domain, Result};

/// Discount, horizon and reward constants of the grid world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdpSpec {
    pub gamma: f64,
    pub step_limit: usize,
    pub reward_goal: f64,
    pub reward_penalty: f64,
    pub reward_default: f64,
}

impl Default for MdpSpec {
    fn default() -> Self {
        Self {
            gamma: 0.95,
            step_limit: 100,
            reward_goal: 1.0,
            reward_penalty: -0.1,
            reward_default: 0.0,
        }
    }
}

impl MdpSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return domain(format!("gamma {} outside (0, 1)", self.gamma));
        }
        if self.step_limit == 0 {
            return domain("step_limit must be at least 1");
        }
        if !(self.reward_goal > self.reward_default && self.reward_default > self.reward_penalty) {
            return domain("rewards must satisfy goal > default > penalty");
        }
        Ok(())
    }
}

/// Discrete grid-world actions. The index order is part of the policy-file
/// and network-head contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GridAction {
    MoveLeft = 0,
    MoveRight = 1,
    MoveUp = 2,
    MoveDown = 3,
    Stay = 4,
}

impl GridAction {
    pub const COUNT: usize = 5;
    pub const ALL: [GridAction; 5] = [
        GridAction::MoveLeft,
        GridAction::MoveRight,
        GridAction::MoveUp,
        GridAction::MoveDown,
        GridAction::Stay,
    ];

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Row/column displacement.
    pub fn delta(self) -> (isize, isize) {
        match self {
            GridAction::MoveLeft => (0, -1),
            GridAction::MoveRight => (0, 1),
            GridAction::MoveUp => (-1, 0),
            GridAction::MoveDown => (1, 0),
            GridAction::Stay => (0, 0),
        }
    }

    /// The two moves at right angles to this one; `Stay` has none.
    pub fn perpendicular(self) -> Option<[GridAction; 2]> {
        match self {
            GridAction::MoveLeft | GridAction::MoveRight => {
                Some([GridAction::MoveUp, GridAction::MoveDown])
            }
            GridAction::MoveUp | GridAction::MoveDown => {
                Some([GridAction::MoveLeft, GridAction::MoveRight])
            }
            GridAction::Stay => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub next_cell: usize,
    pub reward: f64,
    pub done: bool,
}

/// One deterministic transition. Blocked moves and `Stay` leave the agent in
/// place with the penalty reward.
pub fn step(map: &GridMap, spec: &MdpSpec, cell: usize, action: GridAction) -> Result<StepResult> {
    if cell >= map.len() || map.is_obstacle(cell) {
        return domain(format!("step from non-free cell {cell}"));
    }
    if cell == map.goal() {
        return domain("step from the goal cell after termination");
    }
    Ok(step_unchecked(map, spec, cell, action))
}

pub(crate) fn step_unchecked(map: &GridMap, spec: &MdpSpec, cell: usize, action: GridAction) -> StepResult {
    let stay = StepResult {
        next_cell: cell,
        reward: spec.reward_penalty,
        done: false,
    };
    if action == GridAction::Stay {
        return stay;
    }
    let (r, c) = map.coords(cell);
    let (dr, dc) = action.delta();
    let (nr, nc) = (r as isize + dr, c as isize + dc);
    if !map.is_free_at(nr, nc) {
        return stay;
    }
    let next_cell = map.index(nr as usize, nc as usize);
    if next_cell == map.goal() {
        StepResult {
            next_cell,
            reward: spec.reward_goal,
            done: true,
        }
    } else {
        StepResult {
            next_cell,
            reward: spec.reward_default,
            done: false,
        }
    }
}
