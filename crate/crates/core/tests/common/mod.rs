//! Independent oracles shared by the property tests and the acceptance run.
//! None of these call into the code they check, beyond constructing inputs.
#![allow(dead_code)]

use dynsleuth_core::gridworld::{argmax, random_map, step, value_iteration, GridAction, DIRECTIONS};
use dynsleuth_core::neuralnet::{mse_loss, softmax_cross_entropy, softmax_entropy, MlpParams};
use dynsleuth_core::seeding::stream;
use dynsleuth_core::{GridMap, MdpSpec};
use rand::Rng;

pub fn seeded_maps(count: usize, seed: u64) -> Vec<GridMap> {
    (0..count)
        .map(|i| random_map(7, 7, 48, 0.3, &mut stream(seed, "oracle_maps", i as u64), 100_000).unwrap())
        .collect()
}

/// Ray-march without stepping: for each direction, scan the whole grid for
/// obstacles on the ray and take the nearest, else the boundary crossing.
pub fn lidar_oracle(map: &GridMap, cell: usize) -> [u32; 8] {
    let (r, c) = map.coords(cell);
    let (r, c) = (r as i64, c as i64);
    let (h, w) = (map.height() as i64, map.width() as i64);
    let mut out = [0u32; 8];
    for (d, &(dr, dc)) in DIRECTIONS.iter().enumerate() {
        let (dr, dc) = (dr as i64, dc as i64);
        // first k that leaves the grid
        let mut edge = i64::MAX;
        if dr > 0 {
            edge = edge.min(h - r);
        } else if dr < 0 {
            edge = edge.min(r + 1);
        }
        if dc > 0 {
            edge = edge.min(w - c);
        } else if dc < 0 {
            edge = edge.min(c + 1);
        }
        let mut best = edge;
        for other in 0..map.len() {
            if !map.is_obstacle(other) {
                continue;
            }
            let (orow, ocol) = map.coords(other);
            let (er, ec) = (orow as i64 - r, ocol as i64 - c);
            let k = if dr != 0 { er / dr } else { ec / dc };
            if k >= 1 && er == k * dr && ec == k * dc {
                best = best.min(k);
            }
        }
        out[d] = best as u32;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConstraints {
    pub connected: bool,
    pub goal_free: bool,
    pub no_block: bool,
}

/// Explicit window enumeration plus fixed-point label spreading.
pub fn constraints_oracle(width: usize, height: usize, wall: &[bool], goal: usize) -> OracleConstraints {
    let at = |r: usize, c: usize| wall[r * width + c];
    let mut no_block = true;
    for r in 0..height.saturating_sub(1) {
        for c in 0..width.saturating_sub(1) {
            if at(r, c) && at(r + 1, c) && at(r, c + 1) && at(r + 1, c + 1) {
                no_block = false;
            }
        }
    }
    let mut reached = vec![false; wall.len()];
    if let Some(s) = wall.iter().position(|w| !w) {
        reached[s] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..wall.len() {
            if wall[i] || reached[i] {
                continue;
            }
            let (r, c) = (i / width, i % width);
            let touching = (r > 0 && reached[i - width])
                || (r + 1 < height && reached[i + width])
                || (c > 0 && reached[i - 1])
                || (c + 1 < width && reached[i + 1]);
            if touching {
                reached[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let any_free = wall.iter().any(|w| !w);
    OracleConstraints {
        connected: any_free && (0..wall.len()).all(|i| wall[i] || reached[i]),
        goal_free: !wall[goal],
        no_block,
    }
}

/// Shortest 4-neighbor distance to the goal by repeated relaxation.
pub fn distance_oracle(map: &GridMap) -> Vec<Option<usize>> {
    let n = map.len();
    let w = map.width();
    let mut dist: Vec<Option<usize>> = vec![None; n];
    dist[map.goal()] = Some(0);
    for _ in 0..n {
        for i in 0..n {
            if map.is_obstacle(i) {
                continue;
            }
            let (r, c) = map.coords(i);
            let mut nbrs = Vec::new();
            if r > 0 {
                nbrs.push(i - w);
            }
            if r + 1 < map.height() {
                nbrs.push(i + w);
            }
            if c > 0 {
                nbrs.push(i - 1);
            }
            if c + 1 < w {
                nbrs.push(i + 1);
            }
            for j in nbrs {
                if let Some(dj) = dist[j] {
                    if !map.is_obstacle(j) && dist[i].is_none_or(|di| dj + 1 < di) {
                        dist[i] = Some(dj + 1);
                    }
                }
            }
        }
    }
    dist
}

/// Cells where the value-iteration greedy walk length differs from the
/// shortest-path distance, as `(cell, walk, shortest)`.
pub fn greedy_vs_shortest(map: &GridMap, spec: &MdpSpec) -> Vec<(usize, Option<usize>, usize)> {
    let q = value_iteration(map, spec, 1e-10);
    let dist = distance_oracle(map);
    let mut bad = Vec::new();
    for cell in map.free_cells() {
        if cell == map.goal() {
            continue;
        }
        let mut at = cell;
        let mut steps = 0;
        let walk = loop {
            if steps > map.len() {
                break None;
            }
            let a = argmax(q.row(at).unwrap());
            let s = step(map, spec, at, GridAction::from_index(a).unwrap()).unwrap();
            steps += 1;
            if s.done {
                break Some(steps);
            }
            at = s.next_cell;
        };
        let shortest = dist[cell].unwrap();
        if walk != Some(shortest) {
            bad.push((cell, walk, shortest));
        }
    }
    bad
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// One random network and loss; returns the worst relative error between the
/// backpropagated and central-difference gradients over all parameters.
pub fn finite_difference_case(seed: u64) -> f64 {
    let mut rng = stream(seed, "fd_case", 0);
    let depth = rng.random_range(1..=3usize);
    let mut dims = vec![rng.random_range(1..=5usize)];
    for _ in 0..depth {
        dims.push(rng.random_range(1..=5usize));
    }
    let out = *dims.last().unwrap();
    // ReLU has a kink at zero; central differences need every hidden
    // pre-activation at least 1e-3 away from it, so redraw until that holds
    let (net, x) = loop {
        let mut net = MlpParams::init(&dims, &mut rng).unwrap();
        for p in net.as_mut_slice() {
            *p += rng.random_range(-0.5..0.5);
        }
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.random_range(-2.0..2.0)).collect();
        let trace = net.forward_trace(&x).unwrap();
        let pre = trace.pre_activations();
        let hidden = &pre[..pre.len() - 1];
        if hidden.iter().flatten().all(|z| z.abs() > 1e-3) {
            break (net, x);
        }
    };
    let target: Vec<f64> = (0..out).map(|_| rng.random_range(-1.0..1.0)).collect();
    let class = rng.random_range(0..out);
    let kind = seed % 3;
    let loss = |z: &[f64]| -> (f64, Vec<f64>) {
        match kind {
            0 => softmax_cross_entropy(z, class).unwrap(),
            1 => mse_loss(z, &target).unwrap(),
            _ => softmax_entropy(z),
        }
    };
    let (_, upstream) = loss(&net.forward(&x).unwrap());
    let grads = net.backward(&x, &upstream).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for p in 0..net.as_slice().len() {
        let mut plus = net.clone();
        plus.as_mut_slice()[p] += h;
        let mut minus = net.clone();
        minus.as_mut_slice()[p] -= h;
        let num = (loss(&plus.forward(&x).unwrap()).0 - loss(&minus.forward(&x).unwrap()).0) / (2.0 * h);
        worst = worst.max(rel_err(grads.as_slice()[p], num));
    }
    worst
}

/// Whether `child` is `p1` with one contiguous stretch taken from `p2`
/// (goal bit cleared), position by position.
pub fn is_two_point_child(p1: &[u8], p2: &[u8], child: &[u8], goal: usize) -> bool {
    if child[goal] != 0 {
        return false;
    }
    if (0..child.len()).any(|i| child[i] != p1[i] && child[i] != p2[i]) {
        return false;
    }
    // positions where the parents differ must switch from p1 to p2 and back at most once
    let picks: Vec<bool> = (0..child.len())
        .filter(|&i| i != goal && p1[i] != p2[i])
        .map(|i| child[i] == p2[i])
        .collect();
    let switches = picks.windows(2).filter(|w| w[0] != w[1]).count();
    let starts_p2 = picks.first().copied().unwrap_or(false);
    // p1 p2 p1 has two switches; a stretch touching either end has one
    switches <= 1 || (switches == 2 && !starts_p2)
}
