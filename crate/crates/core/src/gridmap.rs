//! Occupancy grids, A* shortest paths and the travel-time array.
//!
//! Moves are 8-connected. An orthogonal step costs one cell (`resolution`
//! meters), a diagonal step costs `resolution * sqrt(2)`. A diagonal step is
//! only allowed when both orthogonally adjacent cells are free, so paths never
//! squeeze between two diagonally touching obstacles.
//!
//! Path costs are tracked as an exact pair of step counts
//! (`orthogonal`, `diagonal`) and only converted to meters at the end. Two
//! optimal paths therefore always report bit-identical lengths regardless of
//! the order in which a search discovered them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::ProblemInstance;

/// A grid cell, `x` is the column and `y` the row (row 0 is the first map line).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }
}

impl From<[usize; 2]> for Cell {
    fn from([x, y]: [usize; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Cell> for [usize; 2] {
    fn from(c: Cell) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("map header must be `<width> <height> <resolution>`, got {0:?}")]
    BadHeader(String),
    #[error("map resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("map row {row} has {found} cells, expected {expected}")]
    RowLength { row: usize, found: usize, expected: usize },
    #[error("map has {found} rows, expected {expected}")]
    RowCount { found: usize, expected: usize },
    #[error("unexpected map character {ch:?} at row {row}, column {col}")]
    BadCell { row: usize, col: usize, ch: char },
    #[error("cell {0} lies outside the map")]
    OutOfBounds(Cell),
    #[error("cell {0} is blocked")]
    Blocked(Cell),
    #[error("tasks {from} and {to} are not connected on the map")]
    Unreachable { from: usize, to: usize },
}

/// Occupancy grid. `true` in `blocked` marks an obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    resolution: f64,
    blocked: Vec<bool>,
}

impl GridMap {
    /// An obstacle-free map.
    pub fn open(width: usize, height: usize, resolution: f64) -> Result<Self, GridError> {
        Self::from_cells(width, height, resolution, vec![false; width * height])
    }

    pub fn from_cells(
        width: usize,
        height: usize,
        resolution: f64,
        blocked: Vec<bool>,
    ) -> Result<Self, GridError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GridError::BadResolution(resolution));
        }
        if blocked.len() != width * height {
            return Err(GridError::RowCount {
                found: blocked.len() / width.max(1),
                expected: height,
            });
        }
        Ok(Self {
            width,
            height,
            resolution,
            blocked,
        })
    }

    /// Builds a map from ASCII rows (`.` free, `#` blocked).
    pub fn from_rows<S: AsRef<str>>(rows: &[S], resolution: f64) -> Result<Self, GridError> {
        let width = rows.first().map(|r| r.as_ref().chars().count()).unwrap_or(0);
        let mut blocked = Vec::with_capacity(width * rows.len());
        for (row, line) in rows.iter().enumerate() {
            let line = line.as_ref();
            let found = line.chars().count();
            if found != width {
                return Err(GridError::RowLength {
                    row,
                    found,
                    expected: width,
                });
            }
            for (col, ch) in line.chars().enumerate() {
                blocked.push(match ch {
                    '.' => false,
                    '#' => true,
                    ch => return Err(GridError::BadCell { row, col, ch }),
                });
            }
        }
        Self::from_cells(width, rows.len(), resolution, blocked)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x < self.width && c.y < self.height
    }

    /// `false` for blocked and out-of-bounds cells.
    pub fn is_free(&self, c: Cell) -> bool {
        self.contains(c) && !self.blocked[self.index(c)]
    }

    pub fn set_blocked(&mut self, c: Cell, blocked: bool) {
        let i = self.index(c);
        self.blocked[i] = blocked;
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
            .filter(|&c| self.is_free(c))
    }

    /// ASCII rows, one string per map line.
    pub fn rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| if self.blocked[y * self.width + x] { '#' } else { '.' })
                    .collect()
            })
            .collect()
    }

    fn index(&self, c: Cell) -> usize {
        c.y * self.width + c.x
    }

    fn cell(&self, i: usize) -> Cell {
        Cell::new(i % self.width, i / self.width)
    }

    /// Calls `f(neighbor, is_diagonal)` for every legal move out of `c`.
    pub fn for_each_neighbor(&self, c: Cell, mut f: impl FnMut(Cell, bool)) {
        const STEPS: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (1, -1),
            (-1, 1),
            (-1, -1),
        ];
        for (dx, dy) in STEPS {
            let (Some(nx), Some(ny)) = (c.x.checked_add_signed(dx), c.y.checked_add_signed(dy))
            else {
                continue;
            };
            let n = Cell::new(nx, ny);
            if !self.is_free(n) {
                continue;
            }
            let diagonal = dx != 0 && dy != 0;
            if diagonal
                && !(self.is_free(Cell::new(nx, c.y)) && self.is_free(Cell::new(c.x, ny)))
            {
                continue;
            }
            f(n, diagonal);
        }
    }

    /// Length in meters of a shortest 8-connected path between two free cells.
    ///
    /// `Ok(None)` means the cells are in different connected components.
    pub fn shortest_path_length(&self, a: Cell, b: Cell) -> Result<Option<f64>, GridError> {
        Ok(self
            .shortest_path_steps(a, b)?
            .map(|steps| steps.meters(self.resolution)))
    }

    /// A* search with the octile heuristic, returning the optimal step counts.
    pub fn shortest_path_steps(&self, a: Cell, b: Cell) -> Result<Option<Steps>, GridError> {
        for c in [a, b] {
            if !self.contains(c) {
                return Err(GridError::OutOfBounds(c));
            }
            if !self.is_free(c) {
                return Err(GridError::Blocked(c));
            }
        }
        if a == b {
            return Ok(Some(Steps::ZERO));
        }

        let goal = self.index(b);
        let mut best: Vec<Option<Steps>> = vec![None; self.blocked.len()];
        let mut closed = vec![false; self.blocked.len()];
        let mut open = BinaryHeap::new();
        let start = self.index(a);
        best[start] = Some(Steps::ZERO);
        open.push(Frontier {
            f: octile(a, b).cost(),
            g: Steps::ZERO,
            idx: start,
        });

        while let Some(Frontier { g, idx, .. }) = open.pop() {
            if closed[idx] {
                continue;
            }
            if idx == goal {
                return Ok(Some(g));
            }
            closed[idx] = true;
            self.for_each_neighbor(self.cell(idx), |n, diagonal| {
                let ni = self.index(n);
                if closed[ni] {
                    return;
                }
                let ng = g.step(diagonal);
                if best[ni].is_none_or(|old| ng.cost() < old.cost()) {
                    best[ni] = Some(ng);
                    let h = octile(n, b);
                    open.push(Frontier {
                        f: ng.add(h).cost(),
                        g: ng,
                        idx: ni,
                    });
                }
            });
        }
        Ok(None)
    }

    /// Every cell reachable from `from`, including `from` itself.
    pub fn reachable_from(&self, from: Cell) -> Vec<Cell> {
        if !self.is_free(from) {
            return Vec::new();
        }
        let mut seen = vec![false; self.blocked.len()];
        let mut stack = vec![from];
        seen[self.index(from)] = true;
        let mut out = Vec::new();
        while let Some(c) = stack.pop() {
            out.push(c);
            self.for_each_neighbor(c, |n, _| {
                let i = self.index(n);
                if !seen[i] {
                    seen[i] = true;
                    stack.push(n);
                }
            });
        }
        out.sort_unstable_by_key(|c| (c.y, c.x));
        out
    }
}

impl FromStr for GridMap {
    type Err = GridError;

    /// Parses the map file format: a `<width> <height> <resolution>` header
    /// line followed by `height` rows of `width` characters.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let header = lines.next().unwrap_or_default();
        let fields: Vec<&str> = header.split_whitespace().collect();
        let bad = || GridError::BadHeader(header.to_string());
        if fields.len() != 3 {
            return Err(bad());
        }
        let width: usize = fields[0].parse().map_err(|_| bad())?;
        let height: usize = fields[1].parse().map_err(|_| bad())?;
        let resolution: f64 = fields[2].parse().map_err(|_| bad())?;
        let rows: Vec<&str> = lines.take_while(|l| !l.is_empty()).collect();
        if rows.len() != height {
            return Err(GridError::RowCount {
                found: rows.len(),
                expected: height,
            });
        }
        let map = Self::from_rows(&rows, resolution)?;
        if height > 0 && map.width != width {
            return Err(GridError::RowLength {
                row: 0,
                found: map.width,
                expected: width,
            });
        }
        Ok(Self { width, ..map })
    }
}

impl fmt::Display for GridMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {} {}", self.width, self.height, self.resolution)?;
        for row in self.rows() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

/// Exact path cost as a count of orthogonal and diagonal moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Steps {
    pub orthogonal: u32,
    pub diagonal: u32,
}

impl Steps {
    pub const ZERO: Steps = Steps {
        orthogonal: 0,
        diagonal: 0,
    };

    fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self {
                diagonal: self.diagonal + 1,
                ..self
            }
        } else {
            Self {
                orthogonal: self.orthogonal + 1,
                ..self
            }
        }
    }

    fn add(self, o: Steps) -> Self {
        Self {
            orthogonal: self.orthogonal + o.orthogonal,
            diagonal: self.diagonal + o.diagonal,
        }
    }

    /// Cost in cells. Distinct step pairs never compare equal here because
    /// `sqrt(2)` is irrational and the counts are small.
    pub fn cost(self) -> f64 {
        f64::from(self.orthogonal) + f64::from(self.diagonal) * std::f64::consts::SQRT_2
    }

    pub fn meters(self, resolution: f64) -> f64 {
        self.cost() * resolution
    }
}

fn octile(a: Cell, b: Cell) -> Steps {
    let dx = a.x.abs_diff(b.x) as u32;
    let dy = a.y.abs_diff(b.y) as u32;
    Steps {
        orthogonal: dx.max(dy) - dx.min(dy),
        diagonal: dx.min(dy),
    }
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    f: f64,
    g: Steps,
    idx: usize,
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Min-heap on f, then prefer deeper nodes, then lower index for determinism.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.cost().total_cmp(&other.g.cost()))
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The `N x N x K` travel-time array in seconds, indexed `[from][to][robot]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TravelTimes {
    n_tasks: usize,
    n_robots: usize,
    seconds: Vec<f64>,
}

impl TravelTimes {
    pub fn zeros(n_tasks: usize, n_robots: usize) -> Self {
        Self {
            n_tasks,
            n_robots,
            seconds: vec![0.0; n_tasks * n_tasks * n_robots],
        }
    }

    /// Builds the array from a symmetric `N x N` distance table in meters.
    pub fn from_distances(distances: &[Vec<f64>], speeds: &[f64]) -> Self {
        let n = distances.len();
        let k = speeds.len();
        let mut t = Self::zeros(n, k);
        for (i, row) in distances.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                for (r, &v) in speeds.iter().enumerate() {
                    t.set(i, j, r, d / v);
                }
            }
        }
        t
    }

    pub fn n_tasks(&self) -> usize {
        self.n_tasks
    }

    pub fn n_robots(&self) -> usize {
        self.n_robots
    }

    #[inline]
    pub fn get(&self, from: usize, to: usize, robot: usize) -> f64 {
        self.seconds[(from * self.n_tasks + to) * self.n_robots + robot]
    }

    pub fn set(&mut self, from: usize, to: usize, robot: usize, seconds: f64) {
        self.seconds[(from * self.n_tasks + to) * self.n_robots + robot] = seconds;
    }

    pub fn max(&self) -> f64 {
        self.seconds.iter().copied().fold(0.0, f64::max)
    }
}

/// Shortest-path distances in meters between the locations of all tasks
/// (depot first). Tasks of the same zone share the zone centroid.
pub fn task_distances(inst: &ProblemInstance, map: &GridMap) -> Result<Vec<Vec<f64>>, GridError> {
    let tasks = inst.tasks();
    let locations: Vec<Cell> = tasks.iter().map(|t| inst.task_location(t)).collect();

    let mut unique: Vec<Cell> = locations.clone();
    unique.sort_unstable();
    unique.dedup();
    let slot = |c: Cell| unique.binary_search(&c).expect("location indexed");

    use rayon::prelude::*;
    let table: Vec<Vec<Option<f64>>> = (0..unique.len())
        .into_par_iter()
        .map(|a| {
            (0..unique.len())
                .map(|b| {
                    if b < a {
                        Ok(None)
                    } else {
                        map.shortest_path_length(unique[a], unique[b])
                            .map(|d| Some(d.unwrap_or(f64::INFINITY)))
                    }
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let lookup = |a: usize, b: usize| {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        table[lo][hi].expect("upper triangle filled")
    };

    let n = tasks.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let d = lookup(slot(locations[i]), slot(locations[j]));
            if !d.is_finite() {
                return Err(GridError::Unreachable { from: i, to: j });
            }
            out[i][j] = d;
        }
    }
    Ok(out)
}

/// `T[i][j][r] = shortest_path(location_i, location_j) / speed_r`.
pub fn build_travel_times(inst: &ProblemInstance, map: &GridMap) -> Result<TravelTimes, GridError> {
    let distances = task_distances(inst, map)?;
    let speeds: Vec<f64> = inst.robots.iter().map(|r| r.travel_speed).collect();
    Ok(TravelTimes::from_distances(&distances, &speeds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_zero() {
        let map = GridMap::open(5, 5, 0.5).unwrap();
        let c = Cell::new(2, 3);
        assert_eq!(map.shortest_path_length(c, c).unwrap(), Some(0.0));
    }

    #[test]
    fn straight_line_of_ten_cells() {
        let map = GridMap::open(10, 1, 0.5).unwrap();
        let d = map
            .shortest_path_length(Cell::new(0, 0), Cell::new(9, 0))
            .unwrap();
        assert_eq!(d, Some(4.5));
    }

    #[test]
    fn diagonal_costs_sqrt_two() {
        let map = GridMap::open(4, 4, 1.0).unwrap();
        let d = map
            .shortest_path_length(Cell::new(0, 0), Cell::new(3, 3))
            .unwrap()
            .unwrap();
        assert_eq!(d, 3.0 * std::f64::consts::SQRT_2);
    }

    #[test]
    fn no_corner_cutting() {
        // The only diagonal gap between (0,0) and (1,1) is pinched by two walls.
        let map = GridMap::from_rows(&[".#", "#."], 1.0).unwrap();
        assert_eq!(
            map.shortest_path_length(Cell::new(0, 0), Cell::new(1, 1))
                .unwrap(),
            None
        );
    }

    #[test]
    fn detour_around_wall() {
        let map = GridMap::from_rows(&["...", ".#.", "..."], 1.0).unwrap();
        // (0,1) -> (2,1): diagonals would clip the blocked center, so the
        // path walks around the edge.
        let steps = map
            .shortest_path_steps(Cell::new(0, 1), Cell::new(2, 1))
            .unwrap()
            .unwrap();
        assert_eq!((steps.orthogonal, steps.diagonal), (4, 0));
        assert_eq!(steps.cost(), 4.0);
    }

    #[test]
    fn blocked_endpoint_is_an_error() {
        let map = GridMap::from_rows(&["..#"], 1.0).unwrap();
        assert_eq!(
            map.shortest_path_length(Cell::new(0, 0), Cell::new(2, 0)),
            Err(GridError::Blocked(Cell::new(2, 0)))
        );
        assert_eq!(
            map.shortest_path_length(Cell::new(0, 0), Cell::new(7, 0)),
            Err(GridError::OutOfBounds(Cell::new(7, 0)))
        );
    }

    #[test]
    fn map_text_round_trip() {
        let text = "4 2 0.25\n.#..\n....\n";
        let map: GridMap = text.parse().unwrap();
        assert_eq!(map.width(), 4);
        assert_eq!(map.height(), 2);
        assert!(!map.is_free(Cell::new(1, 0)));
        assert_eq!(map.to_string(), text);
    }

    #[test]
    fn map_header_errors() {
        assert!(matches!(
            "4 2\n....\n....\n".parse::<GridMap>(),
            Err(GridError::BadHeader(_))
        ));
        assert!(matches!(
            "4 3 1.0\n....\n....\n".parse::<GridMap>(),
            Err(GridError::RowCount { .. })
        ));
        assert!(matches!(
            "4 1 1.0\n..x.\n".parse::<GridMap>(),
            Err(GridError::BadCell { ch: 'x', .. })
        ));
        assert!(matches!(
            "2 1 0\n..\n".parse::<GridMap>(),
            Err(GridError::BadResolution(_))
        ));
    }

    #[test]
    fn travel_time_from_distance() {
        let t = TravelTimes::from_distances(&[vec![0.0, 4.5], vec![4.5, 0.0]], &[0.2, 0.2]);
        assert_eq!(t.get(0, 1, 0), 22.5);
        assert_eq!(t.get(1, 0, 1), 22.5);
        assert_eq!(t.get(1, 1, 0), 0.0);
    }
}
