//! Synthetic ground-truth environments and the visibility-based observation
//! model that stands in for RGB-D perception.

mod generate;
mod observe;
mod scenario;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::geom::{Cell, CellPose};

pub use generate::{generate_world, QuestionKind, WorldParams};
pub use observe::{in_fov, line_of_sight_cells, render_observation, Camera, Observation, VisibleObject};
pub use scenario::{load_scenario, save_scenario, ScenarioError};

#[derive(Debug, thiserror::Error)]
pub enum WorldError {
    #[error("infeasible world parameters: {0}")]
    InfeasibleParams(String),
    #[error("invalid world: {0}")]
    Invalid(String),
}

/// Ground-truth occupancy of a world cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Occupancy {
    Free,
    Occupied,
}

/// Axis-aligned block of cells: `x..x+w` by `y..y+h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub x: i32,
    pub y: i32,
    pub w: i32,
    pub h: i32,
}

impl Rect {
    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x && c.x < self.x + self.w && c.y >= self.y && c.y < self.y + self.h
    }

    pub fn area(&self) -> i32 {
        self.w * self.h
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (self.y..self.y + self.h).flat_map(move |y| (self.x..self.x + self.w).map(move |x| Cell::new(x, y)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: String,
    /// Ground-truth category, e.g. "kitchen".
    pub category: String,
    pub footprint: Vec<Rect>,
}

impl Room {
    pub fn contains(&self, c: Cell) -> bool {
        self.footprint.iter().any(|r| r.contains(c))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldObject {
    pub id: String,
    pub label: String,
    pub cell: Cell,
    /// Only consulted by ground-truth answer checks.
    pub attributes: BTreeMap<String, String>,
}

/// A multiple-choice question with its ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub choices: Vec<String>,
    pub correct_index: usize,
    /// Objects whose observation suffices to answer.
    pub target_object_ids: Vec<String>,
}

/// Immutable ground-truth environment.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub width: i32,
    pub height: i32,
    pub cell_size: f64,
    occupancy: Vec<Occupancy>,
    pub rooms: Vec<Room>,
    pub objects: Vec<WorldObject>,
    pub agent_spawn: CellPose,
    pub question: Question,
    room_of: Vec<Option<usize>>,
}

impl World {
    /// Assembles a world from its parts. Structural invariants are not
    /// checked here; see [`validate_world`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        width: i32,
        height: i32,
        cell_size: f64,
        occupancy: Vec<Occupancy>,
        rooms: Vec<Room>,
        objects: Vec<WorldObject>,
        agent_spawn: CellPose,
        question: Question,
    ) -> Result<Self, WorldError> {
        if width <= 0 || height <= 0 || occupancy.len() != (width * height) as usize {
            return Err(WorldError::Invalid(format!(
                "occupancy has {} cells, expected {width}x{height}",
                occupancy.len()
            )));
        }
        let mut room_of = vec![None; occupancy.len()];
        for (ri, room) in rooms.iter().enumerate() {
            for rect in &room.footprint {
                for c in rect.cells() {
                    if c.x >= 0 && c.y >= 0 && c.x < width && c.y < height {
                        let idx = (c.y * width + c.x) as usize;
                        // first room wins; overlaps are reported by the validator
                        room_of[idx].get_or_insert(ri);
                    }
                }
            }
        }
        Ok(Self {
            width,
            height,
            cell_size,
            occupancy,
            rooms,
            objects,
            agent_spawn,
            question,
            room_of,
        })
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && c.x < self.width && c.y < self.height
    }

    fn index(&self, c: Cell) -> usize {
        (c.y * self.width + c.x) as usize
    }

    /// Out-of-bounds cells read as occupied.
    pub fn occupancy(&self, c: Cell) -> Occupancy {
        if self.in_bounds(c) {
            self.occupancy[self.index(c)]
        } else {
            Occupancy::Occupied
        }
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.occupancy(c) == Occupancy::Free
    }

    /// Index into `rooms` of the room whose footprint holds `c`.
    pub fn room_index(&self, c: Cell) -> Option<usize> {
        if self.in_bounds(c) {
            self.room_of[self.index(c)]
        } else {
            None
        }
    }

    pub fn object(&self, id: &str) -> Option<&WorldObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(move |c| self.is_free(*c))
    }

    /// Occupancy as row strings, `.` free and `#` occupied.
    pub fn occupancy_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| match self.occupancy(Cell::new(x, y)) {
                        Occupancy::Free => '.',
                        Occupancy::Occupied => '#',
                    })
                    .collect()
            })
            .collect()
    }
}

/// Checks every structural invariant of a world; an empty result means valid.
fn well_formed_id(id: &str, prefix: &str) -> bool {
    id.strip_prefix(prefix)
        .and_then(|r| r.strip_prefix('_'))
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) && (n == "0" || !n.starts_with('0')))
}

pub fn validate_world(world: &World) -> Vec<String> {
    let mut out = Vec::new();

    let mut owner: BTreeMap<Cell, Vec<&str>> = BTreeMap::new();
    for room in &world.rooms {
        for rect in &room.footprint {
            for c in rect.cells() {
                owner.entry(c).or_default().push(&room.id);
            }
        }
    }
    for (c, rooms) in &owner {
        if rooms.len() > 1 {
            out.push(format!("cell {c} claimed by rooms {rooms:?}"));
        }
        if !world.is_free(*c) {
            out.push(format!("room {} covers non-free cell {c}", rooms[0]));
        }
    }
    for c in world.free_cells() {
        if !owner.contains_key(&c) {
            out.push(format!("free cell {c} belongs to no room"));
        }
    }

    for room in &world.rooms {
        if !well_formed_id(&room.id, "room") {
            out.push(format!("room id `{}` is not of the form room_<n>", room.id));
        }
    }

    let free: Vec<Cell> = world.free_cells().collect();
    if let Some(&start) = free.first() {
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors4() {
                if world.is_free(n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        if seen.len() != free.len() {
            out.push(format!(
                "free space is not 4-connected ({} of {} cells reachable)",
                seen.len(),
                free.len()
            ));
        }
    } else {
        out.push("world has no free cells".to_string());
    }

    let mut ids = BTreeSet::new();
    for o in &world.objects {
        if !ids.insert(o.id.as_str()) {
            out.push(format!("duplicate object id {}", o.id));
        }
        if !well_formed_id(&o.id, "object") {
            out.push(format!("object id `{}` is not of the form object_<n>", o.id));
        }
        if o.label.is_empty() {
            out.push(format!("object {} has an empty label", o.id));
        }
        if !world.is_free(o.cell) {
            out.push(format!("object {} sits on non-free cell {}", o.id, o.cell));
        }
    }

    if !world.is_free(world.agent_spawn.cell) {
        out.push(format!("agent spawn {} is not free", world.agent_spawn.cell));
    }

    let q = &world.question;
    if !(2..=4).contains(&q.choices.len()) {
        out.push(format!("question has {} choices", q.choices.len()));
    }
    if q.correct_index >= q.choices.len() {
        out.push(format!("correct_index {} out of range", q.correct_index));
    }
    for id in &q.target_object_ids {
        if !ids.contains(id.as_str()) {
            out.push(format!("question targets unknown object {id}"));
        }
    }
    out
}
