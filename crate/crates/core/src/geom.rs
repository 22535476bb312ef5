//! Grid coordinates, compass headings and metric conversions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Meters per grid cell unless a world says otherwise.
pub const DEFAULT_CELL_SIZE: f64 = 0.25;

/// A grid coordinate. `x` is the column, `y` the row (growing downwards).
///
/// Ordering is lexicographic on `(x, y)`; every "lexicographic cell order"
/// tie-break in the crate uses this ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn neighbors4(self) -> [Cell; 4] {
        [
            Cell::new(self.x + 1, self.y),
            Cell::new(self.x - 1, self.y),
            Cell::new(self.x, self.y + 1),
            Cell::new(self.x, self.y - 1),
        ]
    }

    pub fn neighbors8(self) -> [Cell; 8] {
        let Cell { x, y } = self;
        [
            Cell::new(x - 1, y - 1),
            Cell::new(x, y - 1),
            Cell::new(x + 1, y - 1),
            Cell::new(x - 1, y),
            Cell::new(x + 1, y),
            Cell::new(x - 1, y + 1),
            Cell::new(x, y + 1),
            Cell::new(x + 1, y + 1),
        ]
    }

    pub fn is_adjacent4(self, other: Cell) -> bool {
        (self.x - other.x).abs() + (self.y - other.y).abs() == 1
    }

    /// Metric position of the cell center.
    pub fn center(self, cell_size: f64) -> Point2 {
        Point2 {
            x: (self.x as f64 + 0.5) * cell_size,
            y: (self.y as f64 + 0.5) * cell_size,
        }
    }

    /// Cell containing a metric point.
    pub fn containing(p: Point2, cell_size: f64) -> Cell {
        Cell::new((p.x / cell_size).floor() as i32, (p.y / cell_size).floor() as i32)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A metric position on the floor plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_sq(self, other: Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Formats a floor position as the 3-vector `[x, y, 0.000]` used in prompts
/// and serialized graphs.
pub fn format_position(p: Point2) -> String {
    format!("[{:.3}, {:.3}, {:.3}]", p.x, p.y, 0.0)
}

/// One of the eight compass directions. North points towards decreasing `y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Heading {
    E,
    SE,
    S,
    SW,
    W,
    NW,
    N,
    NE,
}

impl Heading {
    pub const ALL: [Heading; 8] = [
        Heading::E,
        Heading::SE,
        Heading::S,
        Heading::SW,
        Heading::W,
        Heading::NW,
        Heading::N,
        Heading::NE,
    ];

    /// Index in steps of 45 degrees, measured from east towards +y.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|h| *h == self).unwrap()
    }

    pub fn from_index(i: usize) -> Heading {
        Self::ALL[i % 8]
    }

    /// Angle in radians in the grid frame (atan2 of `(dy, dx)` with y down).
    pub fn angle(self) -> f64 {
        self.index() as f64 * std::f64::consts::FRAC_PI_4
    }

    /// Unit step `(dx, dy)` for this heading.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::E => (1, 0),
            Heading::SE => (1, 1),
            Heading::S => (0, 1),
            Heading::SW => (-1, 1),
            Heading::W => (-1, 0),
            Heading::NW => (-1, -1),
            Heading::N => (0, -1),
            Heading::NE => (1, -1),
        }
    }

    /// The compass direction nearest to the bearing `(dx, dy)`.
    ///
    /// Returns `None` for a zero vector.
    pub fn nearest_to(dx: f64, dy: f64) -> Option<Heading> {
        if dx.abs() < 1e-12 && dy.abs() < 1e-12 {
            return None;
        }
        let steps = (dy.atan2(dx) / std::f64::consts::FRAC_PI_4).round() as i64;
        Some(Heading::from_index(steps.rem_euclid(8) as usize))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Heading::E => "E",
            Heading::SE => "SE",
            Heading::S => "S",
            Heading::SW => "SW",
            Heading::W => "W",
            Heading::NW => "NW",
            Heading::N => "N",
            Heading::NE => "NE",
        }
    }
}

impl fmt::Display for Heading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error)]
#[error("unknown heading `{0}`")]
pub struct ParseHeadingError(String);

impl FromStr for Heading {
    type Err = ParseHeadingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Heading::ALL
            .into_iter()
            .find(|h| h.as_str() == s)
            .ok_or_else(|| ParseHeadingError(s.to_string()))
    }
}

impl Serialize for Heading {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Heading {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A cell plus the direction the camera is facing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellPose {
    pub cell: Cell,
    pub heading: Heading,
}

impl CellPose {
    pub const fn new(cell: Cell, heading: Heading) -> Self {
        Self { cell, heading }
    }
}
