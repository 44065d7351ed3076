use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gridworld::{step, GridAction, GridMap, MdpSpec, StepResult};

/// A grid world whose moves sometimes slip sideways.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlipGridParams {
    #[serde(with = "map_rows")]
    pub base_map: GridMap,
    pub slip_prob: f64,
    pub move_penalty: f64,
}

impl SlipGridParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.slip_prob) {
            return domain(format!("slip_prob {} outside [0, 1]", self.slip_prob));
        }
        if !self.move_penalty.is_finite() {
            return domain("move_penalty must be finite");
        }
        Ok(())
    }
}

/// With probability `slip_prob` a move is replaced by one of its two
/// perpendicular moves (uniformly). `Stay` never slips. Non-terminal steps
/// additionally pay `move_penalty`.
pub fn slipgrid_step<R: Rng + ?Sized>(
    params: &SlipGridParams,
    spec: &MdpSpec,
    cell: usize,
    action: GridAction,
    rng: &mut R,
) -> Result<StepResult> {
    let executed = match action.perpendicular() {
        Some(side) if params.slip_prob > 0.0 && rng.random_bool(params.slip_prob) => {
            side[rng.random_range(0..2)]
        }
        _ => action,
    };
    let mut out = step(&params.base_map, spec, cell, executed)?;
    if !out.done {
        out.reward += params.move_penalty;
    }
    Ok(out)
}

pub(crate) mod map_rows {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::gridworld::{parse_map, render_rows, GridMap};

    pub fn serialize<S: Serializer>(map: &GridMap, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(render_rows(map))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GridMap, D::Error> {
        let rows = Vec::<String>::deserialize(d)?;
        parse_map(&rows.join("\n")).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::parse_map;
    use crate::seeding::rng_from_seed;

    fn params(slip: f64) -> SlipGridParams {
        SlipGridParams {
            base_map: parse_map(".....\n.....\n..#..\n.....\n....G").unwrap(),
            slip_prob: slip,
            move_penalty: 0.0,
        }
    }

    #[test]
    fn no_slip_matches_plain_step() {
        let p = params(0.0);
        let spec = MdpSpec::default();
        let mut rng = rng_from_seed(0);
        for cell in p.base_map.start_cells() {
            for a in GridAction::ALL {
                assert_eq!(
                    slipgrid_step(&p, &spec, cell, a, &mut rng).unwrap(),
                    step(&p.base_map, &spec, cell, a).unwrap()
                );
            }
        }
    }

    #[test]
    fn full_slip_goes_sideways_evenly() {
        let p = params(1.0);
        let spec = MdpSpec::default();
        let mut rng = rng_from_seed(1);
        let n = 10_000;
        let start = 6; // row 1, col 1
        let mut left = 0;
        for _ in 0..n {
            let r = slipgrid_step(&p, &spec, start, GridAction::MoveUp, &mut rng).unwrap();
            match r.next_cell {
                5 => left += 1,
                7 => {}
                other => panic!("slipped to {other}"),
            }
        }
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((left as f64 - n as f64 / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn stay_never_slips_and_penalty_applies() {
        let mut p = params(1.0);
        p.move_penalty = -0.01;
        let spec = MdpSpec::default();
        let mut rng = rng_from_seed(2);
        for _ in 0..100 {
            let r = slipgrid_step(&p, &spec, 6, GridAction::Stay, &mut rng).unwrap();
            assert_eq!(r.next_cell, 6);
            assert!((r.reward - (-0.11)).abs() < 1e-12);
        }
        assert!(SlipGridParams { slip_prob: 1.5, ..p }.validate().is_err());
    }
}
