use serde::{Deserialize, Serialize};

use super::{Occupancy, World};
use crate::geom::{Cell, CellPose};
use crate::memory::Snapshot;

const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Camera {
    pub fov_deg: f64,
    pub max_range_m: f64,
}

impl Default for Camera {
    fn default() -> Self {
        Self {
            fov_deg: 120.0,
            max_range_m: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VisibleObject {
    pub id: String,
    pub label: String,
    pub cell: Cell,
}

/// What the agent perceives from one pose.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub t: usize,
    pub pose: CellPose,
    /// Sorted by cell.
    pub visible_cells: Vec<(Cell, Occupancy)>,
    /// Sorted by object id order in the world.
    pub visible_objects: Vec<VisibleObject>,
    pub snapshot: Snapshot,
}

/// Cells on the discrete line from `from` to `to`, both ends included.
///
/// Incremental integer Bresenham along the major axis; an exact half step on
/// the minor axis rounds away from `from`.
pub fn line_of_sight_cells(from: Cell, to: Cell) -> Vec<Cell> {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let (adx, ady) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let x_major = adx >= ady;
    let (major, minor) = if x_major { (adx, ady) } else { (ady, adx) };

    let mut cells = Vec::with_capacity(major as usize + 1);
    let (mut x, mut y) = (from.x, from.y);
    cells.push(from);
    // numerator of the minor offset, scaled by 2 * major
    let mut acc = major;
    for _ in 0..major {
        acc += 2 * minor;
        let minor_step = acc >= 2 * major;
        if minor_step {
            acc -= 2 * major;
        }
        if x_major {
            x += sx;
            if minor_step {
                y += sy;
            }
        } else {
            y += sy;
            if minor_step {
                x += sx;
            }
        }
        cells.push(Cell::new(x, y));
    }
    cells
}

/// Whether `c` lies inside the viewing wedge of `pose`, ignoring range and
/// occlusion.
pub fn in_fov(pose: CellPose, c: Cell, fov_deg: f64) -> bool {
    if fov_deg >= 360.0 || c == pose.cell {
        return true;
    }
    let dx = (c.x - pose.cell.x) as f64;
    let dy = (c.y - pose.cell.y) as f64;
    let mut diff = dy.atan2(dx) - pose.heading.angle();
    while diff > std::f64::consts::PI {
        diff -= std::f64::consts::TAU;
    }
    while diff < -std::f64::consts::PI {
        diff += std::f64::consts::TAU;
    }
    diff.abs() <= (fov_deg / 2.0).to_radians() + ANGLE_EPS
}

fn in_range(world: &World, from: Cell, c: Cell, max_range_m: f64) -> bool {
    let dx = (c.x - from.x) as f64;
    let dy = (c.y - from.y) as f64;
    (dx * dx + dy * dy) * world.cell_size * world.cell_size <= max_range_m * max_range_m + ANGLE_EPS
}

/// Ray-casts from `pose` over the camera wedge. A cell is visible when every
/// cell strictly between it and the agent is free; the agent's own cell is
/// always visible.
pub fn render_observation(world: &World, pose: CellPose, camera: &Camera, t: usize) -> Observation {
    let reach = (camera.max_range_m / world.cell_size).floor() as i32;
    let origin = pose.cell;
    let mut visible_cells = Vec::new();
    for x in origin.x - reach..=origin.x + reach {
        for y in origin.y - reach..=origin.y + reach {
            let c = Cell::new(x, y);
            if !world.in_bounds(c)
                || !in_range(world, origin, c, camera.max_range_m)
                || !in_fov(pose, c, camera.fov_deg)
            {
                continue;
            }
            let line = line_of_sight_cells(origin, c);
            let between = if line.len() > 2 { &line[1..line.len() - 1] } else { &[][..] };
            let blocked = between.iter().any(|m| !world.is_free(*m));
            if !blocked || c == origin {
                visible_cells.push((c, world.occupancy(c)));
            }
        }
    }
    visible_cells.sort_by_key(|(c, _)| *c);

    let visible_objects: Vec<VisibleObject> = world
        .objects
        .iter()
        .filter(|o| {
            visible_cells
                .binary_search_by_key(&o.cell, |(c, _)| *c)
                .is_ok_and(|i| visible_cells[i].1 == Occupancy::Free)
        })
        .map(|o| VisibleObject {
            id: o.id.clone(),
            label: o.label.clone(),
            cell: o.cell,
        })
        .collect();

    let labels = visible_objects.iter().map(|o| o.label.clone()).collect();
    Observation {
        t,
        pose,
        visible_cells,
        visible_objects,
        snapshot: Snapshot::new(t, pose, labels),
    }
}
