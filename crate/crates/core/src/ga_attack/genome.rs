use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::gridworld::{random_map, GridMap};

/// Fixed attacker priors: map size, goal position and the obstacle density
/// used for random initial guesses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub width: usize,
    pub height: usize,
    pub goal: usize,
    pub density: f64,
    pub max_map_tries: usize,
}

impl SearchSpace {
    pub fn new(width: usize, height: usize, goal: usize) -> Self {
        Self {
            width,
            height,
            goal,
            density: crate::gridworld::DEFAULT_DENSITY,
            max_map_tries: 10_000,
        }
    }

    pub fn of_map(map: &GridMap) -> Self {
        Self::new(map.width(), map.height(), map.goal())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return domain("search space must be non-empty");
        }
        if self.goal >= self.len() {
            return domain(format!("goal {} outside a {}x{} map", self.goal, self.width, self.height));
        }
        if !(0.0..=1.0).contains(&self.density) {
            return domain("density must lie in [0, 1]");
        }
        if self.max_map_tries == 0 {
            return domain("max_map_tries must be at least 1");
        }
        Ok(())
    }

    pub fn random_genome<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<MapGenome> {
        let map = random_map(self.width, self.height, self.goal, self.density, rng, self.max_map_tries)?;
        Ok(MapGenome::from_map(&map))
    }
}

/// Occupancy bits of a candidate floor plan (1 = wall). The goal bit is kept at 0.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapGenome {
    pub bits: Vec<u8>,
    pub goal: usize,
}

impl MapGenome {
    pub fn new(mut bits: Vec<u8>, goal: usize) -> Result<Self> {
        if goal >= bits.len() {
            return domain("goal outside genome");
        }
        if bits.iter().any(|&b| b > 1) {
            return domain("genome bits must be 0 or 1");
        }
        bits[goal] = 0;
        Ok(Self { bits, goal })
    }

    pub fn from_map(map: &GridMap) -> Self {
        Self {
            bits: map.to_bits(),
            goal: map.goal(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn to_map(&self, width: usize, height: usize) -> Result<GridMap> {
        GridMap::from_bits(width, height, &self.bits, self.goal)
    }

    fn check_pair(&self, other: &MapGenome) -> Result<()> {
        if self.len() != other.len() || self.goal != other.goal {
            return Err(Error::Shape(format!(
                "genome mismatch: lengths {} and {}, goals {} and {}",
                self.len(),
                other.len(),
                self.goal,
                other.goal
            )));
        }
        Ok(())
    }
}

/// Child = p1[0,a) ++ p2[a,b) ++ p1[b,len), goal bit re-pinned.
pub fn crossover_at(p1: &MapGenome, p2: &MapGenome, a: usize, b: usize) -> Result<MapGenome> {
    p1.check_pair(p2)?;
    if a > b || b > p1.len() {
        return domain(format!("crossover points must satisfy 0 <= {a} <= {b} <= {}", p1.len()));
    }
    let mut bits = p1.bits.clone();
    bits[a..b].copy_from_slice(&p2.bits[a..b]);
    bits[p1.goal] = 0;
    Ok(MapGenome { bits, goal: p1.goal })
}

/// Two-point crossover with both cut points drawn uniformly from 0..=len.
pub fn two_point_crossover<R: Rng + ?Sized>(p1: &MapGenome, p2: &MapGenome, rng: &mut R) -> Result<MapGenome> {
    p1.check_pair(p2)?;
    let x = rng.random_range(0..=p1.len());
    let y = rng.random_range(0..=p1.len());
    crossover_at(p1, p2, x.min(y), x.max(y))
}

/// Flips every non-goal bit independently with probability `beta`.
pub fn mutate<R: Rng + ?Sized>(genome: &MapGenome, beta: f64, rng: &mut R) -> Result<MapGenome> {
    if !(0.0..=1.0).contains(&beta) {
        return domain("mutation rate must lie in [0, 1]");
    }
    let mut child = genome.clone();
    for (i, bit) in child.bits.iter_mut().enumerate() {
        if i != genome.goal && rng.random_bool(beta) {
            *bit ^= 1;
        }
    }
    Ok(child)
}

/// Index of the winner of a two-way tournament (draws with replacement;
/// equal scores go to the lower index).
pub fn tournament_select<R: Rng + ?Sized>(scores: &[f64], rng: &mut R) -> Result<usize> {
    if scores.is_empty() {
        return domain("tournament over an empty population");
    }
    let i = rng.random_range(0..scores.len());
    let j = rng.random_range(0..scores.len());
    Ok(match scores[i].partial_cmp(&scores[j]) {
        Some(std::cmp::Ordering::Greater) => i,
        Some(std::cmp::Ordering::Less) => j,
        _ => i.min(j),
    })
}

/// Fraction of non-goal cells whose occupancy matches the truth.
pub fn recovery_rate(predicted: &GridMap, truth: &GridMap) -> Result<f64> {
    if predicted.width() != truth.width() || predicted.height() != truth.height() || predicted.goal() != truth.goal() {
        return Err(Error::Shape(format!(
            "cannot compare a {}x{} map (goal {}) with a {}x{} map (goal {})",
            predicted.width(),
            predicted.height(),
            predicted.goal(),
            truth.width(),
            truth.height(),
            truth.goal()
        )));
    }
    let scored = truth.len() - 1;
    if scored == 0 {
        return Ok(1.0);
    }
    let matches = (0..truth.len())
        .filter(|&c| c != truth.goal() && predicted.is_obstacle(c) == truth.is_obstacle(c))
        .count();
    Ok(matches as f64 / scored as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeding::rng_from_seed;

    fn g(s: &str, goal: usize) -> MapGenome {
        MapGenome::new(s.bytes().map(|b| b - b'0').collect(), goal).unwrap()
    }

    #[test]
    fn crossover_segments() {
        let p1 = g("00000000", 7);
        let mut p2 = g("11111111", 7);
        p2.bits[7] = 1;
        assert_eq!(crossover_at(&p1, &p2, 2, 5).unwrap(), g("00111000", 7));
        assert_eq!(crossover_at(&p1, &p2, 3, 3).unwrap(), p1);
        let whole = crossover_at(&p1, &p2, 0, 8).unwrap();
        assert_eq!(whole, g("11111110", 7));
        assert!(crossover_at(&p1, &g("000", 0), 0, 1).is_err());
    }

    #[test]
    fn mutation_extremes() {
        let mut rng = rng_from_seed(1);
        let x = g("0101100", 2);
        assert_eq!(mutate(&x, 0.0, &mut rng).unwrap(), x);
        assert_eq!(mutate(&x, 1.0, &mut rng).unwrap(), g("1000011", 2));
        assert!(mutate(&x, 1.5, &mut rng).is_err());
    }

    #[test]
    fn mutation_flip_count_is_binomial() {
        let mut rng = rng_from_seed(2);
        let x = MapGenome::new(vec![0; 49], 48).unwrap();
        let trials = 10_000;
        let flips: usize = (0..trials)
            .map(|_| mutate(&x, 0.05, &mut rng).unwrap().bits.iter().filter(|&&b| b == 1).count())
            .sum();
        let mean = flips as f64 / trials as f64;
        let expected = 0.05 * 48.0;
        let sigma = (48.0 * 0.05 * 0.95 / trials as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * sigma, "{mean}");
    }

    #[test]
    fn tournament_win_rate() {
        let mut rng = rng_from_seed(3);
        assert_eq!(tournament_select(&[1.0], &mut rng).unwrap(), 0);
        assert!(tournament_select(&[], &mut rng).is_err());
        let n = 20_000;
        let wins = (0..n).filter(|_| tournament_select(&[0.0, 10.0], &mut rng).unwrap() == 1).count();
        let p = wins as f64 / n as f64;
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        assert!((p - 0.75).abs() < 3.0 * sigma, "{p}");
        // Equal scores: the lower index always wins.
        let wins = (0..1000).filter(|_| tournament_select(&[5.0, 5.0], &mut rng).unwrap() == 1).count();
        let p = wins as f64 / 1000.0;
        assert!(p < 0.35, "{p}");
    }

    #[test]
    fn recovery_examples() {
        let truth = GridMap::empty(7, 7, 48).unwrap();
        assert_eq!(recovery_rate(&truth, &truth).unwrap(), 1.0);
        let mut all = truth.clone();
        for c in 0..48 {
            all.set_obstacle(c, true);
        }
        assert_eq!(recovery_rate(&all, &truth).unwrap(), 0.0);
        let mut one = truth.clone();
        one.set_obstacle(3, true);
        assert!((recovery_rate(&one, &truth).unwrap() - 47.0 / 48.0).abs() < 1e-12);
        assert!(recovery_rate(&GridMap::empty(7, 7, 0).unwrap(), &truth).is_err());
    }
}
