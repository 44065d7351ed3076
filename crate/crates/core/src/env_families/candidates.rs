use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{PointBotParams, SlipGridParams};
use crate::error::{config, Error, Result};
use crate::gridworld::parse_map;

pub const CANDIDATES_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    SlipGrid,
    PointBot,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SlipGrid => "slipgrid",
            Family::PointBot => "pointbot",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FamilyParams {
    SlipGrid(SlipGridParams),
    PointBot(PointBotParams),
}

impl FamilyParams {
    pub fn family(&self) -> Family {
        match self {
            FamilyParams::SlipGrid(_) => Family::SlipGrid,
            FamilyParams::PointBot(_) => Family::PointBot,
        }
    }
}

/// One labeled member of an environment family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsCandidate {
    pub label: String,
    pub params: FamilyParams,
}

/// An ordered list of candidates; the order fixes the feature layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub schema_version: u32,
    pub family: Family,
    pub candidates: Vec<DynamicsCandidate>,
}

impl CandidateSet {
    pub fn new(family: Family, candidates: Vec<DynamicsCandidate>) -> Result<Self> {
        let set = Self {
            schema_version: CANDIDATES_SCHEMA_VERSION,
            family,
            candidates,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CANDIDATES_SCHEMA_VERSION {
            return config(format!(
                "candidate set schema version {} (expected {CANDIDATES_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.candidates.len() < 2 {
            return config("a candidate set needs at least two candidates");
        }
        for (i, c) in self.candidates.iter().enumerate() {
            if c.params.family() != self.family {
                return config(format!("candidate {:?} is not a {} candidate", c.label, self.family.name()));
            }
            if self.candidates[..i].iter().any(|o| o.label == c.label) {
                return config(format!("duplicate candidate label {:?}", c.label));
            }
            match &c.params {
                FamilyParams::SlipGrid(p) => p.validate()?,
                FamilyParams::PointBot(p) => p.validate()?,
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.candidates.iter().map(|c| c.label.clone()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.label == label)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let set: CandidateSet = serde_json::from_str(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// The fixed floor plan shared by every `slipgrid6` candidate.
pub const SLIPGRID_MAP: &str = "\
...#...
.#...#.
.#.#.#.
...#...
##...#.
...#.#.
.#....G";

pub const SLIPGRID_SLIPS: [f64; 6] = [0.0, 0.05, 0.1, 0.15, 0.2, 0.3];
pub const SLIPGRID_MOVE_PENALTY: f64 = -0.01;

/// Six single-axis perturbations of the baseline robot.
pub fn pointbot_set(low: f64, high: f64) -> Result<CandidateSet> {
    let base = PointBotParams::default();
    let make = |label: &str, p: PointBotParams| DynamicsCandidate {
        label: label.to_owned(),
        params: FamilyParams::PointBot(p),
    };
    CandidateSet::new(
        Family::PointBot,
        vec![
            make("LightTorso", PointBotParams { mass: base.mass * low, ..base }),
            make("HeavyTorso", PointBotParams { mass: base.mass * high, ..base }),
            make("SlipperyJoints", PointBotParams { friction: base.friction * low, ..base }),
            make("RoughJoints", PointBotParams { friction: base.friction * high, ..base }),
            make("Weak", PointBotParams { power: base.power * low, ..base }),
            make("Strong", PointBotParams { power: base.power * high, ..base }),
        ],
    )
}

pub fn slipgrid_set() -> Result<CandidateSet> {
    let base_map = parse_map(SLIPGRID_MAP)?;
    let candidates = SLIPGRID_SLIPS
        .iter()
        .map(|&slip| DynamicsCandidate {
            label: format!("slip{:.2}", slip),
            params: FamilyParams::SlipGrid(SlipGridParams {
                base_map: base_map.clone(),
                slip_prob: slip,
                move_penalty: SLIPGRID_MOVE_PENALTY,
            }),
        })
        .collect();
    CandidateSet::new(Family::SlipGrid, candidates)
}

pub const BUILTIN_SETS: [&str; 3] = ["pointbot6", "slipgrid6", "pointbot_extreme"];

pub fn builtin_candidate_set(name: &str) -> Result<CandidateSet> {
    match name {
        "pointbot6" => pointbot_set(0.5, 2.0),
        "pointbot_extreme" => pointbot_set(0.1, 10.0),
        "slipgrid6" => slipgrid_set(),
        other => Err(Error::Config(format!(
            "unknown candidate set {other:?} (known: {})",
            BUILTIN_SETS.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::validate_constraints;

    #[test]
    fn pointbot6_labels_and_axes() {
        let set = builtin_candidate_set("pointbot6").unwrap();
        assert_eq!(
            set.labels(),
            ["LightTorso", "HeavyTorso", "SlipperyJoints", "RoughJoints", "Weak", "Strong"]
        );
        let base = PointBotParams::default();
        let FamilyParams::PointBot(light) = set.candidates[0].params else { panic!() };
        assert_eq!(light.friction, base.friction);
        assert_eq!(light.power, base.power);
        assert_eq!(light.mass, 0.5);
    }

    #[test]
    fn slipgrid6_shares_one_valid_map() {
        let set = builtin_candidate_set("slipgrid6").unwrap();
        assert_eq!(set.len(), 6);
        let maps: Vec<_> = set
            .candidates
            .iter()
            .map(|c| match &c.params {
                FamilyParams::SlipGrid(p) => p.base_map.clone(),
                _ => panic!(),
            })
            .collect();
        assert!(maps.windows(2).all(|w| w[0] == w[1]));
        assert!(validate_constraints(&maps[0]).pass);
    }

    #[test]
    fn json_preserves_order() {
        for name in BUILTIN_SETS {
            let set = builtin_candidate_set(name).unwrap();
            let back = CandidateSet::from_json(&set.to_json().unwrap()).unwrap();
            assert_eq!(back, set);
        }
        assert!(builtin_candidate_set("hopper").is_err());
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let mut set = builtin_candidate_set("pointbot6").unwrap();
        set.candidates[1].label = "LightTorso".into();
        assert!(set.validate().is_err());
    }
}
