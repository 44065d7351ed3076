use serde::{Deserialize, Serialize};

use super::GridMap;
use crate::error::{domain, Result};

/// Ray directions in observation order: N, NE, E, SE, S, SW, W, NW.
pub const DIRECTIONS: [(isize, isize); 8] = [
    (-1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
];

/// Step distances to the first blocking cell along the eight rays.
///
/// A diagonal step counts as one, same as a cardinal step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LidarObservation(pub [u32; 8]);

impl LidarObservation {
    pub fn to_features(self) -> [f64; 8] {
        self.0.map(f64::from)
    }

    /// Packs the eight distances into one integer key (8 bits each).
    pub fn key(self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, &d| (acc << 8) | u64::from(d.min(255)))
    }
}

pub fn lidar(map: &GridMap, cell: usize) -> Result<LidarObservation> {
    if cell >= map.len() || map.is_obstacle(cell) {
        return domain(format!("lidar queried from non-free cell {cell}"));
    }
    Ok(lidar_unchecked(map, cell))
}

pub(crate) fn lidar_unchecked(map: &GridMap, cell: usize) -> LidarObservation {
    let (r, c) = map.coords(cell);
    let (r, c) = (r as isize, c as isize);
    let mut out = [0u32; 8];
    for (slot, &(dr, dc)) in out.iter_mut().zip(DIRECTIONS.iter()) {
        let mut steps = 1;
        while map.is_free_at(r + dr * steps as isize, c + dc * steps as isize) {
            steps += 1;
        }
        *slot = steps;
    }
    LidarObservation(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::parse_map;

    #[test]
    fn center_of_empty_map() {
        let m = GridMap::empty(7, 7, 0).unwrap();
        assert_eq!(lidar(&m, 24).unwrap().0, [4; 8]);
    }

    #[test]
    fn corner_of_empty_map() {
        let m = GridMap::empty(7, 7, 48).unwrap();
        // N, NE, E, SE, S, SW, W, NW
        assert_eq!(lidar(&m, 0).unwrap().0, [1, 1, 7, 7, 7, 1, 1, 1]);
    }

    #[test]
    fn adjacent_obstacle_and_errors() {
        let m = parse_map("G....\n..#..\n.....").unwrap();
        let obs = lidar(&m, 6).unwrap();
        assert_eq!(obs.0[2], 1);
        assert!(lidar(&m, 7).is_err());
    }

    #[test]
    fn key_is_injective_for_small_distances() {
        let a = LidarObservation([1, 2, 3, 4, 5, 6, 7, 8]);
        let b = LidarObservation([1, 2, 3, 4, 5, 6, 8, 7]);
        assert_ne!(a.key(), b.key());
    }
}
