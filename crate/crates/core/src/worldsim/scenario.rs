//! Scenario files: a TOML rendering of a [`World`] in canonical field order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{validate_world, Occupancy, Question, Rect, Room, World, WorldError, WorldObject};
use crate::geom::{Cell, CellPose, Heading};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("malformed scenario: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("bad occupancy row {row}: {reason}")]
    Occupancy { row: usize, reason: String },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("scenario violates world invariants: {0:?}")]
    Invariants(Vec<String>),
}

#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    width: i32,
    height: i32,
    cell_size: f64,
    occupancy: Vec<String>,
    rooms: Vec<RoomEntry>,
    objects: Vec<ObjectEntry>,
    agent_spawn: SpawnEntry,
    question: Question,
}

#[derive(Serialize, Deserialize)]
struct RoomEntry {
    id: String,
    category: String,
    /// `[x, y, w, h]` per rectangle.
    footprint: Vec<[i32; 4]>,
}

#[derive(Serialize, Deserialize)]
struct ObjectEntry {
    id: String,
    label: String,
    cell: [i32; 2],
    attributes: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct SpawnEntry {
    cell: [i32; 2],
    heading: Heading,
}

pub fn save_scenario(world: &World) -> String {
    let file = ScenarioFile {
        width: world.width,
        height: world.height,
        cell_size: world.cell_size,
        occupancy: world.occupancy_rows(),
        rooms: world
            .rooms
            .iter()
            .map(|r| RoomEntry {
                id: r.id.clone(),
                category: r.category.clone(),
                footprint: r.footprint.iter().map(|f| [f.x, f.y, f.w, f.h]).collect(),
            })
            .collect(),
        objects: world
            .objects
            .iter()
            .map(|o| ObjectEntry {
                id: o.id.clone(),
                label: o.label.clone(),
                cell: [o.cell.x, o.cell.y],
                attributes: o.attributes.clone(),
            })
            .collect(),
        agent_spawn: SpawnEntry {
            cell: [world.agent_spawn.cell.x, world.agent_spawn.cell.y],
            heading: world.agent_spawn.heading,
        },
        question: world.question.clone(),
    };
    toml::to_string(&file).expect("scenario structs always serialize")
}

/// Parses a scenario and checks the world invariants.
pub fn load_scenario(text: &str) -> Result<World, ScenarioError> {
    let file: ScenarioFile = toml::from_str(text)?;
    if file.occupancy.len() != file.height as usize {
        return Err(ScenarioError::Occupancy {
            row: file.occupancy.len(),
            reason: format!("expected {} rows", file.height),
        });
    }
    let mut occ = Vec::with_capacity((file.width * file.height).max(0) as usize);
    for (row, line) in file.occupancy.iter().enumerate() {
        if line.chars().count() != file.width as usize {
            return Err(ScenarioError::Occupancy {
                row,
                reason: format!("expected {} columns", file.width),
            });
        }
        for ch in line.chars() {
            occ.push(match ch {
                '.' => Occupancy::Free,
                '#' => Occupancy::Occupied,
                other => {
                    return Err(ScenarioError::Occupancy {
                        row,
                        reason: format!("unexpected character {other:?}"),
                    })
                }
            });
        }
    }
    let rooms = file
        .rooms
        .into_iter()
        .map(|r| Room {
            id: r.id,
            category: r.category,
            footprint: r.footprint.into_iter().map(|[x, y, w, h]| Rect { x, y, w, h }).collect(),
        })
        .collect();
    let objects = file
        .objects
        .into_iter()
        .map(|o| WorldObject {
            id: o.id,
            label: o.label,
            cell: Cell::new(o.cell[0], o.cell[1]),
            attributes: o.attributes,
        })
        .collect();
    let spawn = CellPose::new(
        Cell::new(file.agent_spawn.cell[0], file.agent_spawn.cell[1]),
        file.agent_spawn.heading,
    );
    let world = World::new(
        file.width,
        file.height,
        file.cell_size,
        occ,
        rooms,
        objects,
        spawn,
        file.question,
    )?;
    let violations = validate_world(&world);
    if !violations.is_empty() {
        return Err(ScenarioError::Invariants(violations));
    }
    Ok(world)
}
