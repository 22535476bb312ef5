//! The agent's 2D occupancy belief and everything derived from it: frontier
//! cells, frontier clusters with stable ids, and shortest paths.

mod frontier;
mod path;

use std::fmt::Write as _;

use crate::geom::Cell;
use crate::worldsim::{Observation, Occupancy};

pub use frontier::{cluster_frontiers, detect_frontier_cells, FrontierCluster, FrontierTracker, DEFAULT_MIN_CLUSTER_SIZE};
pub use path::{nearest_reachable_free_cell, reachable_from, shortest_path};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MappingError {
    #[error("observation cell {0} lies outside the {1}x{2} grid")]
    DimensionMismatch(Cell, i32, i32),
    #[error("no free path from {from} to {to}")]
    Unreachable { from: Cell, to: Cell },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub width: i32,
    pub height: i32,
    pub cell_size: f64,
    state: Vec<CellState>,
}

impl OccupancyGrid {
    /// A grid with every cell unknown.
    pub fn unknown(width: i32, height: i32, cell_size: f64) -> Self {
        Self {
            width,
            height,
            cell_size,
            state: vec![CellState::Unknown; (width.max(0) * height.max(0)) as usize],
        }
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    /// Out-of-bounds cells read as occupied.
    pub fn get(&self, c: Cell) -> CellState {
        if self.in_bounds(c) {
            self.state[(c.y * self.width + c.x) as usize]
        } else {
            CellState::Occupied
        }
    }

    pub fn set(&mut self, c: Cell, s: CellState) {
        if self.in_bounds(c) {
            let idx = (c.y * self.width + c.x) as usize;
            self.state[idx] = s;
        }
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.get(c) == CellState::Free
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(move |c| self.is_free(*c))
    }

    pub fn count(&self, s: CellState) -> usize {
        self.state.iter().filter(|x| **x == s).count()
    }

    /// Writes every visible cell's observed state; nothing else changes.
    pub fn integrate(&mut self, obs: &Observation) -> Result<(), MappingError> {
        if let Some((c, _)) = obs.visible_cells.iter().find(|(c, _)| !self.in_bounds(*c)) {
            return Err(MappingError::DimensionMismatch(*c, self.width, self.height));
        }
        for (c, occ) in &obs.visible_cells {
            let s = match occ {
                Occupancy::Free => CellState::Free,
                Occupancy::Occupied => CellState::Occupied,
            };
            self.set(*c, s);
        }
        Ok(())
    }

    /// Row strings: `.` free, `#` occupied, `?` unknown, `F` frontier.
    pub fn debug_dump(&self) -> String {
        let frontier = detect_frontier_cells(self);
        let mut out = String::new();
        for y in 0..self.height {
            for x in 0..self.width {
                let c = Cell::new(x, y);
                let ch = if frontier.contains(&c) {
                    'F'
                } else {
                    match self.get(c) {
                        CellState::Free => '.',
                        CellState::Occupied => '#',
                        CellState::Unknown => '?',
                    }
                };
                out.push(ch);
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Inverse of [`debug_dump`](Self::debug_dump); `F` reads as free.
    pub fn from_rows(rows: &[&str], cell_size: f64) -> Self {
        let height = rows.len() as i32;
        let width = rows.first().map_or(0, |r| r.chars().count()) as i32;
        let mut grid = Self::unknown(width, height, cell_size);
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.chars().enumerate() {
                let s = match ch {
                    '.' | 'F' => CellState::Free,
                    '#' => CellState::Occupied,
                    _ => CellState::Unknown,
                };
                grid.set(Cell::new(x as i32, y as i32), s);
            }
        }
        grid
    }
}

/// Functional form of [`OccupancyGrid::integrate`].
pub fn integrate_observation(grid: &OccupancyGrid, obs: &Observation) -> Result<OccupancyGrid, MappingError> {
    let mut next = grid.clone();
    next.integrate(obs)?;
    Ok(next)
}
