use std::collections::VecDeque;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// An H×W occupancy grid with a single goal cell.
///
/// Cells are stored row-major, row 0 at the top. The boundary walls around
/// the grid are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<bool>,
    goal: usize,
}

/// Outcome of checking a map against the floor-plan constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub connected: bool,
    pub unique_goal_free: bool,
    pub no_2x2_block: bool,
    pub pass: bool,
}

impl GridMap {
    /// Builds a map from raw parts. Only structural checks happen here;
    /// floor-plan constraints are checked by [`validate_constraints`].
    pub fn new(width: usize, height: usize, cells: Vec<bool>, goal: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return domain("map dimensions must be positive");
        }
        if cells.len() != width * height {
            return Err(Error::Shape(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        if goal >= cells.len() {
            return domain(format!("goal {goal} outside a {height}x{width} map"));
        }
        Ok(Self {
            width,
            height,
            cells,
            goal,
        })
    }

    pub fn empty(width: usize, height: usize, goal: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height], goal)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn goal(&self) -> usize {
        self.goal
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn is_obstacle(&self, cell: usize) -> bool {
        self.cells[cell]
    }

    pub fn is_free(&self, cell: usize) -> bool {
        !self.cells[cell]
    }

    /// Whether `(row, col)` is inside the grid and free.
    pub fn is_free_at(&self, row: isize, col: isize) -> bool {
        self.in_bounds(row, col) && !self.cells[row as usize * self.width + col as usize]
    }

    pub fn in_bounds(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn coords(&self, cell: usize) -> (usize, usize) {
        (cell / self.width, cell % self.width)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Cell indices of every free cell, in row-major order.
    pub fn free_cells(&self) -> Vec<usize> {
        (0..self.cells.len()).filter(|&c| !self.cells[c]).collect()
    }

    /// Free cells other than the goal: the states an episode can start from.
    pub fn start_cells(&self) -> Vec<usize> {
        (0..self.cells.len())
            .filter(|&c| !self.cells[c] && c != self.goal)
            .collect()
    }

    pub fn set_obstacle(&mut self, cell: usize, obstacle: bool) {
        self.cells[cell] = obstacle;
    }

    /// The map as a 0/1 genome (1 = obstacle).
    pub fn to_bits(&self) -> Vec<u8> {
        self.cells.iter().map(|&c| u8::from(c)).collect()
    }

    pub fn from_bits(width: usize, height: usize, bits: &[u8], goal: usize) -> Result<Self> {
        Self::new(width, height, bits.iter().map(|&b| b != 0).collect(), goal)
    }

    fn neighbors4(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let (r, c) = self.coords(cell);
        let (r, c) = (r as isize, c as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)]
            .into_iter()
            .filter(move |&(dr, dc)| self.in_bounds(r + dr, c + dc))
            .map(move |(dr, dc)| self.index((r + dr) as usize, (c + dc) as usize))
    }

    /// Breadth-first step distance from every cell to the goal over free
    /// 4-neighbors. Unreachable cells and obstacles get `None`.
    pub fn goal_distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.cells.len()];
        if self.cells[self.goal] {
            return dist;
        }
        dist[self.goal] = Some(0);
        let mut queue = VecDeque::from([self.goal]);
        while let Some(cell) = queue.pop_front() {
            let d = dist[cell].unwrap();
            for next in self.neighbors4(cell) {
                if !self.cells[next] && dist[next].is_none() {
                    dist[next] = Some(d + 1);
                    queue.push_back(next);
                }
            }
        }
        dist
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_map(self))
    }
}

/// Parses the `.map` text format: rows of `.` (free), `#` (obstacle) and a
/// single `G` (goal, free).
pub fn parse_map(text: &str) -> Result<GridMap> {
    let rows: Vec<&str> = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();
    let rows: Vec<&str> = match rows.iter().rposition(|l| !l.is_empty()) {
        Some(last) => rows[..=last].to_vec(),
        None => Vec::new(),
    };
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "empty map".into(),
        });
    }
    let width = rows[0].chars().count();
    let mut cells = Vec::with_capacity(width * rows.len());
    let mut goal = None;
    for (r, row) in rows.iter().enumerate() {
        let n = row.chars().count();
        if n != width {
            return Err(Error::Parse {
                line: r + 1,
                column: n.min(width) + 1,
                message: format!("row has {n} cells, expected {width}"),
            });
        }
        for (c, ch) in row.chars().enumerate() {
            match ch {
                '.' => cells.push(false),
                '#' => cells.push(true),
                'G' => {
                    if goal.is_some() {
                        return Err(Error::Parse {
                            line: r + 1,
                            column: c + 1,
                            message: "more than one goal".into(),
                        });
                    }
                    goal = Some(r * width + c);
                    cells.push(false);
                }
                other => {
                    return Err(Error::Parse {
                        line: r + 1,
                        column: c + 1,
                        message: format!("illegal character {other:?}"),
                    })
                }
            }
        }
    }
    let goal = goal.ok_or_else(|| Error::Parse {
        line: rows.len(),
        column: 1,
        message: "no goal cell".into(),
    })?;
    GridMap::new(width, rows.len(), cells, goal)
}

/// Inverse of [`parse_map`]. Rows are joined by `\n` with no trailing newline.
pub fn render_map(map: &GridMap) -> String {
    map.cells
        .chunks(map.width)
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(c, &wall)| match (r * map.width + c == map.goal, wall) {
                    (true, _) => 'G',
                    (false, true) => '#',
                    (false, false) => '.',
                })
                .collect::<String>()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_rows(map: &GridMap) -> Vec<String> {
    render_map(map).lines().map(str::to_owned).collect()
}

pub fn validate_constraints(map: &GridMap) -> ConstraintReport {
    let unique_goal_free = !map.cells[map.goal];

    let no_2x2_block = (0..map.height.saturating_sub(1)).all(|r| {
        (0..map.width.saturating_sub(1)).all(|c| {
            let i = r * map.width + c;
            !(map.cells[i] && map.cells[i + 1] && map.cells[i + map.width] && map.cells[i + map.width + 1])
        })
    });

    let free = map.cells.iter().filter(|&&c| !c).count();
    let connected = match map.cells.iter().position(|&c| !c) {
        None => false,
        Some(start) => {
            let mut seen = vec![false; map.cells.len()];
            seen[start] = true;
            let mut stack = vec![start];
            let mut reached = 1;
            while let Some(cell) = stack.pop() {
                for next in map.neighbors4(cell) {
                    if !map.cells[next] && !seen[next] {
                        seen[next] = true;
                        reached += 1;
                        stack.push(next);
                    }
                }
            }
            reached == free
        }
    };

    ConstraintReport {
        connected,
        unique_goal_free,
        no_2x2_block,
        pass: connected && unique_goal_free && no_2x2_block,
    }
}

pub fn is_valid(map: &GridMap) -> bool {
    validate_constraints(map).pass
}

/// Rejection-samples a constraint-valid map: every non-goal cell is an
/// obstacle with probability `density`.
pub fn random_map<R: Rng + ?Sized>(
    width: usize,
    height: usize,
    goal: usize,
    density: f64,
    rng: &mut R,
    max_tries: usize,
) -> Result<GridMap> {
    if max_tries == 0 {
        return domain("max_tries must be at least 1");
    }
    if !(0.0..=1.0).contains(&density) {
        return domain(format!("density {density} outside [0, 1]"));
    }
    let mut map = GridMap::empty(width, height, goal)?;
    for _ in 0..max_tries {
        for cell in 0..map.cells.len() {
            map.cells[cell] = cell != goal && rng.random_bool(density);
        }
        if is_valid(&map) {
            return Ok(map);
        }
    }
    Err(Error::GenerationFailed { tries: max_tries })
}
