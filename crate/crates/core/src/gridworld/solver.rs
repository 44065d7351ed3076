use serde::{Deserialize, Serialize};

use super::mdp::{step_unchecked, GridAction, MdpSpec};
use super::GridMap;
use crate::error::{domain, Result};

const NO_SLOT: usize = usize::MAX;

/// Optimal action values over the free cells of one map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    free: Vec<usize>,
    slot: Vec<usize>,
    values: Vec<[f64; GridAction::COUNT]>,
}

impl QTable {
    /// Free cells in row-major order; row `i` of the table belongs to `free_cells()[i]`.
    pub fn free_cells(&self) -> &[usize] {
        &self.free
    }

    pub fn rows(&self) -> &[[f64; GridAction::COUNT]] {
        &self.values
    }

    /// Q-values of a grid cell, `None` for obstacles.
    pub fn row(&self, cell: usize) -> Option<&[f64; GridAction::COUNT]> {
        match self.slot.get(cell) {
            Some(&s) if s != NO_SLOT => Some(&self.values[s]),
            _ => None,
        }
    }

    pub fn greedy(&self, cell: usize) -> Option<usize> {
        self.row(cell).map(|q| argmax(q))
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

struct Transition {
    next: usize,
    reward: f64,
    done: bool,
}

/// Solves the grid-world MDP exactly. The goal is absorbing with value 0.
pub fn value_iteration(map: &GridMap, spec: &MdpSpec, vi_tolerance: f64) -> QTable {
    let free = map.free_cells();
    let mut slot = vec![NO_SLOT; map.len()];
    for (i, &c) in free.iter().enumerate() {
        slot[c] = i;
    }
    let goal_slot = slot[map.goal()];

    let transitions: Vec<[Transition; GridAction::COUNT]> = free
        .iter()
        .map(|&cell| {
            GridAction::ALL.map(|a| {
                let r = step_unchecked(map, spec, cell, a);
                Transition {
                    next: slot[r.next_cell],
                    reward: r.reward,
                    done: r.done,
                }
            })
        })
        .collect();

    let mut values = vec![[0.0; GridAction::COUNT]; free.len()];
    let mut state_value = vec![0.0; free.len()];
    for _ in 0..1_000_000 {
        let mut change: f64 = 0.0;
        for (s, trans) in transitions.iter().enumerate() {
            if s == goal_slot {
                continue;
            }
            for (a, t) in trans.iter().enumerate() {
                let q = if t.done {
                    t.reward
                } else {
                    t.reward + spec.gamma * state_value[t.next]
                };
                change = change.max((q - values[s][a]).abs());
                values[s][a] = q;
            }
        }
        for (v, q) in state_value.iter_mut().zip(&values) {
            *v = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        }
        if change < vi_tolerance {
            break;
        }
    }

    QTable { free, slot, values }
}

/// Largest Bellman optimality residual of `q` under `map`/`spec`.
pub fn bellman_residual(q: &QTable, map: &GridMap, spec: &MdpSpec) -> f64 {
    let mut worst: f64 = 0.0;
    for &cell in q.free_cells() {
        if cell == map.goal() {
            continue;
        }
        let row = q.row(cell).unwrap();
        for a in GridAction::ALL {
            let t = step_unchecked(map, spec, cell, a);
            let target = if t.done {
                t.reward
            } else {
                let next = q.row(t.next_cell).unwrap();
                t.reward + spec.gamma * next.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            worst = worst.max((row[a.index()] - target).abs());
        }
    }
    worst
}

/// Row-wise softmax of a Q-row at `temperature`.
pub fn boltzmann_row(q: &[f64; GridAction::COUNT], temperature: f64) -> [f64; GridAction::COUNT] {
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = q.map(|v| ((v - max) / temperature).exp());
    let total: f64 = out.iter().sum();
    for p in &mut out {
        *p /= total;
    }
    out
}

/// Softmax of every Q-row; row order follows [`QTable::free_cells`].
pub fn boltzmann_policy(q: &QTable, temperature: f64) -> Result<Vec<[f64; GridAction::COUNT]>> {
    if !(temperature > 0.0) || !temperature.is_finite() {
        return domain(format!("temperature must be positive, got {temperature}"));
    }
    Ok(q.rows().iter().map(|row| boltzmann_row(row, temperature)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridworld::{parse_map, random_map};
    use crate::seeding::rng_from_seed;

    #[test]
    fn two_cell_backup() {
        let m = parse_map(".G").unwrap();
        let spec = MdpSpec::default();
        let q = value_iteration(&m, &spec, 1e-8);
        let row = q.row(0).unwrap();
        assert_eq!(row[GridAction::MoveRight.index()], 1.0);
        assert!((row[GridAction::Stay.index()] - (-0.1 + spec.gamma * 1.0)).abs() < 1e-12);
        assert_eq!(q.row(1).unwrap(), &[0.0; 5]);
    }

    #[test]
    fn residual_below_tolerance() {
        let spec = MdpSpec::default();
        for seed in 0..5 {
            let m = random_map(7, 7, 3, 0.3, &mut rng_from_seed(seed), 10_000).unwrap();
            let q = value_iteration(&m, &spec, 1e-8);
            assert!(bellman_residual(&q, &m, &spec) < 1e-8);
        }
    }

    #[test]
    fn greedy_follows_bfs_distance() {
        let spec = MdpSpec::default();
        for seed in 10..15 {
            let m = random_map(7, 7, 40, 0.3, &mut rng_from_seed(seed), 10_000).unwrap();
            let q = value_iteration(&m, &spec, 1e-8);
            let dist = m.goal_distances();
            for cell in m.start_cells() {
                let a = GridAction::from_index(q.greedy(cell).unwrap()).unwrap();
                let next = step_unchecked(&m, &spec, cell, a).next_cell;
                assert_eq!(dist[next].unwrap() + 1, dist[cell].unwrap());
            }
        }
    }

    #[test]
    fn boltzmann_limits() {
        let m = parse_map("...\n.G.\n...").unwrap();
        let q = value_iteration(&m, &MdpSpec::default(), 1e-8);
        for row in boltzmann_policy(&q, 1e6).unwrap() {
            assert!(row.iter().all(|p| (p - 0.2).abs() < 1e-3));
        }
        let corridor = parse_map("....G").unwrap();
        let q = value_iteration(&corridor, &MdpSpec::default(), 1e-8);
        let cold = boltzmann_policy(&q, 1e-3).unwrap();
        for (i, row) in cold.iter().enumerate() {
            if q.free_cells()[i] != corridor.goal() {
                assert!(row[GridAction::MoveRight.index()] >= 0.999);
            }
        }
        let uniform = boltzmann_row(&[0.3; 5], 0.1);
        assert!(uniform.iter().all(|&p| p == 0.2));
        assert!(boltzmann_policy(&q, 0.0).is_err());
        assert!(boltzmann_policy(&q, -1.0).is_err());
    }
}
