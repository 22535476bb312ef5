//! Seeded procedural worlds: recursive room partitioning with two-cell
//! doorways, furnished from the bundled lexicon, with one question attached.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{validate_world, Occupancy, Question, Rect, Room, World, WorldError, WorldObject};
use crate::geom::{Cell, CellPose, Heading};
use crate::lexicon::lexicon;

const MAX_ATTEMPTS: usize = 64;
const COLORS: [&str; 8] = ["red", "blue", "green", "white", "black", "gray", "brown", "yellow"];

/// The question families of the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionKind {
    Identification,
    Counting,
    Existence,
    State,
    Location,
}

impl QuestionKind {
    pub const ALL: [QuestionKind; 5] = [
        QuestionKind::Identification,
        QuestionKind::Counting,
        QuestionKind::Existence,
        QuestionKind::State,
        QuestionKind::Location,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldParams {
    pub width: i32,
    pub height: i32,
    pub cell_size: f64,
    pub n_rooms: usize,
    pub min_room_cells: usize,
    pub n_objects: usize,
    /// Fixed question family; drawn from the seed when absent.
    pub question_template: Option<QuestionKind>,
}

impl Default for WorldParams {
    fn default() -> Self {
        Self {
            width: 24,
            height: 16,
            cell_size: crate::geom::DEFAULT_CELL_SIZE,
            n_rooms: 4,
            min_room_cells: 24,
            n_objects: 10,
            question_template: None,
        }
    }
}

struct Wall {
    vertical: bool,
    /// Column (vertical) or row (horizontal) of the wall.
    line: i32,
    start: i32,
    len: i32,
}

/// Builds a world that is a pure function of `(seed, params)`.
pub fn generate_world(seed: u64, params: &WorldParams) -> Result<World, WorldError> {
    if params.n_rooms == 0 {
        return Err(WorldError::InfeasibleParams("n_rooms must be at least 1".into()));
    }
    if params.width < 5 || params.height < 5 {
        return Err(WorldError::InfeasibleParams("grid must be at least 5x5".into()));
    }
    if params.cell_size <= 0.0 {
        return Err(WorldError::InfeasibleParams("cell_size must be positive".into()));
    }
    let interior = ((params.width - 2) * (params.height - 2)) as usize;
    if interior < params.n_rooms * params.min_room_cells.max(1) {
        return Err(WorldError::InfeasibleParams(format!(
            "{} interior cells cannot hold {} rooms of {} cells",
            interior, params.n_rooms, params.min_room_cells
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        if let Some(world) = try_generate(&mut rng, params)? {
            debug_assert!(validate_world(&world).is_empty());
            return Ok(world);
        }
    }
    Err(WorldError::InfeasibleParams(format!(
        "room packing failed after {MAX_ATTEMPTS} attempts"
    )))
}

fn try_generate(rng: &mut ChaCha8Rng, params: &WorldParams) -> Result<Option<World>, WorldError> {
    let Some((leaves, walls)) = partition(rng, params) else {
        return Ok(None);
    };
    let (w, h) = (params.width, params.height);
    let mut occ = vec![Occupancy::Occupied; (w * h) as usize];
    for r in &leaves {
        for c in r.cells() {
            occ[(c.y * w + c.x) as usize] = Occupancy::Free;
        }
    }
    let leaf_of = |c: Cell| leaves.iter().position(|r| r.contains(c));

    // Each door is assigned to the room on its left/top side.
    let mut doors: Vec<(usize, Rect)> = Vec::new();
    for wall in &walls {
        let mut candidates = Vec::new();
        for s in wall.start..wall.start + wall.len - 1 {
            let (pair, before, after) = if wall.vertical {
                let pair = [Cell::new(wall.line, s), Cell::new(wall.line, s + 1)];
                (pair, pair.map(|c| Cell::new(c.x - 1, c.y)), pair.map(|c| Cell::new(c.x + 1, c.y)))
            } else {
                let pair = [Cell::new(s, wall.line), Cell::new(s + 1, wall.line)];
                (pair, pair.map(|c| Cell::new(c.x, c.y - 1)), pair.map(|c| Cell::new(c.x, c.y + 1)))
            };
            let Some(room_a) = leaf_of(before[0]) else { continue };
            if before.iter().all(|c| leaf_of(*c) == Some(room_a))
                && after.iter().all(|c| leaf_of(*c).is_some())
                && leaf_of(after[0]) == leaf_of(after[1])
            {
                candidates.push((room_a, pair));
            }
        }
        let Some(&(room, pair)) = candidates.choose(rng) else {
            return Ok(None);
        };
        for c in pair {
            occ[(c.y * w + c.x) as usize] = Occupancy::Free;
        }
        let rect = if wall.vertical {
            Rect { x: pair[0].x, y: pair[0].y, w: 1, h: 2 }
        } else {
            Rect { x: pair[0].x, y: pair[0].y, w: 2, h: 1 }
        };
        doors.push((room, rect));
    }
    let door_cells: BTreeSet<Cell> = doors.iter().flat_map(|(_, r)| r.cells()).collect();

    let lex = lexicon();
    let mut categories = lex.categories();
    categories.shuffle(rng);

    let mut order: Vec<usize> = (0..leaves.len()).collect();
    order.sort_by_key(|&i| Cell::new(leaves[i].x, leaves[i].y));
    let mut rooms: Vec<Room> = Vec::new();
    for (n, &leaf) in order.iter().enumerate() {
        let mut footprint = vec![leaves[leaf]];
        footprint.extend(doors.iter().filter(|(r, _)| *r == leaf).map(|(_, rect)| *rect));
        rooms.push(Room {
            id: format!("room_{n}"),
            category: categories[n % categories.len()].clone(),
            footprint,
        });
    }

    // interior cells only: doors stay clear and the spawn cell stays empty
    let mut placeable: Vec<Cell> = leaves
        .iter()
        .flat_map(|r| r.cells().collect::<Vec<_>>())
        .filter(|c| !door_cells.contains(c))
        .collect();
    placeable.sort();
    placeable.shuffle(rng);
    let Some(spawn_cell) = placeable.pop() else {
        return Ok(None);
    };
    // face into the room so the first view is never a wall at point-blank range
    let random_heading = Heading::from_index(rng.random_range(0..8));
    let heading = leaves
        .iter()
        .find(|r| r.contains(spawn_cell))
        .and_then(|r| {
            let cx = r.x as f64 + r.w as f64 / 2.0 - 0.5;
            let cy = r.y as f64 + r.h as f64 / 2.0 - 0.5;
            Heading::nearest_to(cx - spawn_cell.x as f64, cy - spawn_cell.y as f64)
        })
        .unwrap_or(random_heading);
    let room_of_cell = |c: Cell| rooms.iter().position(|r| r.contains(c)).unwrap();

    let kind = params
        .question_template
        .unwrap_or_else(|| *QuestionKind::ALL.choose(rng).unwrap());

    let mut pools: Vec<Vec<String>> = rooms
        .iter()
        .map(|r| {
            let mut labels: Vec<String> = lex.labels_for(&r.category).iter().map(|e| e.label.clone()).collect();
            labels.shuffle(rng);
            labels
        })
        .collect();
    let mut room_order: Vec<usize> = (0..rooms.len()).collect();
    room_order.shuffle(rng);

    let mut used_labels = BTreeSet::new();
    let mut objects: Vec<WorldObject> = Vec::new();
    let mut exhausted = 0;
    let mut i = 0;
    while objects.len() < params.n_objects && exhausted < rooms.len() {
        let ri = room_order[i % room_order.len()];
        i += 1;
        let label = loop {
            match pools[ri].pop() {
                Some(l) if used_labels.contains(&l) => continue,
                other => break other,
            }
        };
        let Some(label) = label else {
            exhausted += 1;
            continue;
        };
        exhausted = 0;
        let Some(pos) = placeable.iter().position(|c| room_of_cell(*c) == ri) else {
            continue;
        };
        let cell = placeable.swap_remove(pos);
        used_labels.insert(label.clone());
        objects.push(make_object(rng, objects.len(), label, cell));
    }
    if objects.is_empty() {
        return Err(WorldError::InfeasibleParams("no objects could be placed".into()));
    }

    let spawn_room = room_of_cell(spawn_cell);
    let question = make_question(rng, kind, &mut objects, &mut placeable, &rooms, spawn_room);

    let world = World::new(
        w,
        h,
        params.cell_size,
        occ,
        rooms,
        objects,
        CellPose::new(spawn_cell, heading),
        question,
    )?;
    if !validate_world(&world).is_empty() {
        return Ok(None);
    }
    Ok(Some(world))
}

/// Recursively splits the interior into `n_rooms` rectangles separated by
/// one-cell walls.
fn partition(rng: &mut ChaCha8Rng, params: &WorldParams) -> Option<(Vec<Rect>, Vec<Wall>)> {
    let min_cells = params.min_room_cells.max(1) as i32;
    let mut rects = vec![Rect { x: 1, y: 1, w: params.width - 2, h: params.height - 2 }];
    let mut walls = Vec::new();
    while rects.len() < params.n_rooms {
        let mut by_area: Vec<usize> = (0..rects.len()).collect();
        by_area.sort_by_key(|&i| (-rects[i].area(), i));
        let mut split = None;
        'outer: for &i in &by_area {
            let r = rects[i];
            let prefer_vertical = r.w >= r.h;
            for vertical in [prefer_vertical, !prefer_vertical] {
                let options = split_options(r, vertical, min_cells);
                if let Some(&line) = options.choose(rng) {
                    split = Some((i, vertical, line));
                    break 'outer;
                }
            }
        }
        let (i, vertical, line) = split?;
        let r = rects.swap_remove(i);
        if vertical {
            rects.push(Rect { x: r.x, y: r.y, w: line - r.x, h: r.h });
            rects.push(Rect { x: line + 1, y: r.y, w: r.x + r.w - line - 1, h: r.h });
            walls.push(Wall { vertical, line, start: r.y, len: r.h });
        } else {
            rects.push(Rect { x: r.x, y: r.y, w: r.w, h: line - r.y });
            rects.push(Rect { x: r.x, y: line + 1, w: r.w, h: r.y + r.h - line - 1 });
            walls.push(Wall { vertical, line, start: r.x, len: r.w });
        }
    }
    Some((rects, walls))
}

fn split_options(r: Rect, vertical: bool, min_cells: i32) -> Vec<i32> {
    let (origin, extent, across) = if vertical { (r.x, r.w, r.h) } else { (r.y, r.h, r.w) };
    if across < 3 {
        return Vec::new();
    }
    (origin + 3..origin + extent - 3)
        .filter(|&line| {
            let a = line - origin;
            let b = origin + extent - line - 1;
            a * across >= min_cells && b * across >= min_cells
        })
        .collect()
}

fn make_object(rng: &mut ChaCha8Rng, n: usize, label: String, cell: Cell) -> WorldObject {
    let mut attributes = BTreeMap::new();
    attributes.insert("color".to_string(), COLORS.choose(rng).unwrap().to_string());
    if lexicon().get(&label).is_some_and(|e| e.switchable) {
        let state = if rng.random_bool(0.5) { "on" } else { "off" };
        attributes.insert("state".to_string(), state.to_string());
    }
    WorldObject {
        id: format!("object_{n}"),
        label,
        cell,
        attributes,
    }
}

fn shuffled_choices(rng: &mut ChaCha8Rng, correct: String, mut others: Vec<String>, n: usize) -> (Vec<String>, usize) {
    others.retain(|o| *o != correct);
    others.shuffle(rng);
    let mut choices: Vec<String> = others.into_iter().take(n - 1).collect();
    choices.push(correct.clone());
    choices.shuffle(rng);
    let idx = choices.iter().position(|c| *c == correct).unwrap();
    (choices, idx)
}

fn make_question(
    rng: &mut ChaCha8Rng,
    kind: QuestionKind,
    objects: &mut Vec<WorldObject>,
    placeable: &mut Vec<Cell>,
    rooms: &[Room],
    spawn_room: usize,
) -> Question {
    let room_of = |c: Cell| rooms.iter().position(|r| r.contains(c)).unwrap();
    let switchable = |o: &WorldObject| o.attributes.contains_key("state");

    let kind = if kind == QuestionKind::State && !objects.iter().any(switchable) {
        QuestionKind::Identification
    } else {
        kind
    };
    let eligible: Vec<usize> = (0..objects.len())
        .filter(|&i| kind != QuestionKind::State || switchable(&objects[i]))
        .collect();
    // prefer targets the agent cannot trivially see from its spawn room
    let away: Vec<usize> = eligible
        .iter()
        .copied()
        .filter(|&i| room_of(objects[i].cell) != spawn_room)
        .collect();
    let pool = if away.is_empty() { &eligible } else { &away };
    let target = *pool.choose(rng).unwrap();
    let label = objects[target].label.clone();
    let target_room = room_of(objects[target].cell);

    match kind {
        QuestionKind::Identification => {
            let color = objects[target].attributes["color"].clone();
            let (choices, correct_index) =
                shuffled_choices(rng, color, COLORS.iter().map(|c| c.to_string()).collect(), 4);
            Question {
                text: format!("What color is the {label}?"),
                choices: capitalize_all(choices),
                correct_index,
                target_object_ids: vec![objects[target].id.clone()],
            }
        }
        QuestionKind::Counting => {
            let count = rng.random_range(1..=3usize);
            let mut ids = vec![objects[target].id.clone()];
            for _ in 1..count {
                let Some(pos) = placeable.iter().position(|c| room_of(*c) == target_room) else {
                    break;
                };
                let cell = placeable.swap_remove(pos);
                let obj = make_object(rng, objects.len(), label.clone(), cell);
                ids.push(obj.id.clone());
                objects.push(obj);
            }
            let correct = ids.len().to_string();
            let choices: Vec<String> = (1..=4).map(|n| n.to_string()).collect();
            let correct_index = choices.iter().position(|c| *c == correct).unwrap();
            Question {
                text: format!("How many {label} can be found in the house?"),
                choices,
                correct_index,
                target_object_ids: ids,
            }
        }
        QuestionKind::Existence => Question {
            text: format!("Is there a {label} in the {}?", rooms[target_room].category),
            choices: vec!["Yes".into(), "No".into()],
            correct_index: 0,
            target_object_ids: vec![objects[target].id.clone()],
        },
        QuestionKind::State => {
            let on = objects[target].attributes["state"] == "on";
            Question {
                text: format!("Is the {label} switched on or off?"),
                choices: vec!["On".into(), "Off".into()],
                correct_index: if on { 0 } else { 1 },
                target_object_ids: vec![objects[target].id.clone()],
            }
        }
        QuestionKind::Location => {
            let (choices, correct_index) = shuffled_choices(
                rng,
                rooms[target_room].category.clone(),
                lexicon().categories(),
                4,
            );
            Question {
                text: format!("In which room is the {label}?"),
                choices: capitalize_all(choices),
                correct_index,
                target_object_ids: vec![objects[target].id.clone()],
            }
        }
    }
}

fn capitalize_all(choices: Vec<String>) -> Vec<String> {
    choices
        .into_iter()
        .map(|c| {
            let mut chars = c.chars();
            match chars.next() {
                Some(f) => f.to_uppercase().chain(chars).collect(),
                None => c,
            }
        })
        .collect()
}
