use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub const DT: f64 = 0.05;
pub const HORIZON: usize = 200;
pub const GOAL_X: f64 = 10.0;
pub const CONTROL_COST: f64 = 0.001;
pub const SUCCESS_BONUS: f64 = 1.0;
pub const OBS_DIM: usize = 3;

/// Physical constants of one point-mass robot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointBotParams {
    pub mass: f64,
    pub friction: f64,
    pub power: f64,
}

impl Default for PointBotParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            friction: 0.5,
            power: 1.0,
        }
    }
}

impl PointBotParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return domain(format!("mass must be positive, got {}", self.mass));
        }
        if !(self.friction >= 0.0 && self.friction.is_finite()) {
            return domain(format!("friction must be non-negative, got {}", self.friction));
        }
        if !(self.power > 0.0 && self.power.is_finite()) {
            return domain(format!("power must be positive, got {}", self.power));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PointBotState {
    pub x: f64,
    pub v: f64,
    pub t: usize,
}

impl PointBotState {
    pub fn observation(&self) -> [f64; OBS_DIM] {
        [self.x / GOAL_X, self.v, 1.0]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointBotStep {
    pub state: PointBotState,
    pub reward: f64,
    pub done: bool,
}

/// Semi-implicit Euler step of `m·dv/dt = power·a − friction·v`.
///
/// Reward is forward progress minus a small control cost; reaching
/// `x ≥ 10` ends the episode with a bonus, otherwise it ends at the horizon.
pub fn pointbot_step(params: &PointBotParams, state: PointBotState, action: f64) -> Result<PointBotStep> {
    if !(state.x.is_finite() && state.v.is_finite()) || action.is_nan() {
        return Err(Error::NonFinite(format!(
            "pointbot state x={} v={} action={action}",
            state.x, state.v
        )));
    }
    if state.t >= HORIZON {
        return domain("pointbot episode already past its horizon");
    }
    let a = action.clamp(-1.0, 1.0);
    let accel = (params.power * a - params.friction * state.v) / params.mass;
    let v = state.v + DT * accel;
    let x = state.x + DT * v;
    let t = state.t + 1;
    let mut reward = (x - state.x) - CONTROL_COST * a * a;
    let reached = x >= GOAL_X;
    if reached {
        reward += SUCCESS_BONUS;
    }
    Ok(PointBotStep {
        state: PointBotState { x, v, t },
        reward,
        done: reached || t >= HORIZON,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_is_equilibrium() {
        let s = pointbot_step(&PointBotParams::default(), PointBotState::default(), 0.0).unwrap();
        assert_eq!((s.state.x, s.state.v, s.reward, s.done), (0.0, 0.0, 0.0, false));
    }

    #[test]
    fn frictionless_velocity_is_linear_in_steps() {
        let p = PointBotParams { mass: 1.0, friction: 0.0, power: 1.0 };
        let mut s = PointBotState::default();
        for k in 1..=50 {
            s = pointbot_step(&p, s, 1.0).unwrap().state;
            assert!((s.v - k as f64 * DT).abs() < 1e-12);
        }
    }

    #[test]
    fn doubling_mass_halves_acceleration() {
        let s0 = PointBotState { x: 1.0, v: 0.7, t: 3 };
        let light = PointBotParams::default();
        let heavy = PointBotParams { mass: 2.0, ..light };
        let dv_light = pointbot_step(&light, s0, 0.4).unwrap().state.v - s0.v;
        let dv_heavy = pointbot_step(&heavy, s0, 0.4).unwrap().state.v - s0.v;
        assert!((dv_light - 2.0 * dv_heavy).abs() < 1e-15);
    }

    #[test]
    fn actions_are_clamped_and_nan_rejected() {
        let p = PointBotParams::default();
        let a = pointbot_step(&p, PointBotState::default(), 5.0).unwrap();
        let b = pointbot_step(&p, PointBotState::default(), 1.0).unwrap();
        assert_eq!(a.state, b.state);
        let bad = PointBotState { x: f64::NAN, v: 0.0, t: 0 };
        assert!(pointbot_step(&p, bad, 0.0).is_err());
    }

    #[test]
    fn episode_ends_at_goal_or_horizon() {
        let p = PointBotParams::default();
        let near = PointBotState { x: 9.99, v: 2.0, t: 10 };
        let s = pointbot_step(&p, near, 1.0).unwrap();
        assert!(s.done);
        assert!(s.reward > 1.0);
        let late = PointBotState { x: 0.0, v: 0.0, t: HORIZON - 1 };
        assert!(pointbot_step(&p, late, 0.0).unwrap().done);
        assert!(p.validate().is_ok());
        assert!(PointBotParams { mass: 0.0, ..p }.validate().is_err());
    }
}
