use std::collections::{BTreeMap, HashMap, VecDeque};

use super::{AgentNode, Edge, NodeId, NodeKind, ObjectNode, RegionNode, RoomNode, SceneGraph, SceneGraphError, UNKNOWN_ROOM};
use crate::geom::Cell;
use crate::mapping::OccupancyGrid;
use crate::worldsim::{Observation, World};

fn parse_kind(s: &str, kind: NodeKind) -> Result<NodeId, SceneGraphError> {
    let id: NodeId = s.parse()?;
    if id.kind != kind {
        return Err(SceneGraphError::BadNodeId(s.to_string()));
    }
    Ok(id)
}

/// Folds one observation into the graph. `grid` must already include it.
///
/// Objects are keyed by their world id, so re-observing one never duplicates
/// it. Regions are recomputed from scratch as the 4-connected components of
/// explored free space within each room. Frontier nodes and their edges are
/// left alone; they are owned by frontier enrichment.
pub fn update_scene_graph(
    sg: &mut SceneGraph,
    obs: &Observation,
    grid: &OccupancyGrid,
    world: &World,
) -> Result<(), SceneGraphError> {
    sg.cell_size = grid.cell_size;
    for vo in &obs.visible_objects {
        let id = parse_kind(&vo.id, NodeKind::Object)?;
        sg.objects.insert(
            id,
            ObjectNode {
                id,
                label: vo.label.clone(),
                cell: vo.cell,
                position: vo.cell.center(grid.cell_size),
            },
        );
    }

    let mut room_at: BTreeMap<Cell, usize> = BTreeMap::new();
    for c in grid.free_cells() {
        let ri = world
            .room_index(c)
            .ok_or(SceneGraphError::InconsistentRoomPartition(c))?;
        room_at.insert(c, ri);
    }

    // BTreeMap order visits each component first at its smallest cell
    let mut region_of: HashMap<Cell, NodeId> = HashMap::new();
    let mut regions = BTreeMap::new();
    let mut region_room: BTreeMap<NodeId, usize> = BTreeMap::new();
    for (&seed, &ri) in &room_at {
        if region_of.contains_key(&seed) {
            continue;
        }
        let id = NodeId::new(NodeKind::Region, regions.len());
        let mut cells = vec![seed];
        region_of.insert(seed, id);
        let mut queue = VecDeque::from([seed]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors4() {
                if room_at.get(&n) == Some(&ri) && !region_of.contains_key(&n) {
                    region_of.insert(n, id);
                    cells.push(n);
                    queue.push_back(n);
                }
            }
        }
        cells.sort();
        regions.insert(id, RegionNode { id, cells });
        region_room.insert(id, ri);
    }

    let mut room_ids: BTreeMap<usize, NodeId> = BTreeMap::new();
    for &ri in region_room.values() {
        if let std::collections::btree_map::Entry::Vacant(e) = room_ids.entry(ri) {
            e.insert(parse_kind(&world.rooms[ri].id, NodeKind::Room)?);
        }
    }
    for &id in room_ids.values() {
        sg.rooms.entry(id).or_insert_with(|| RoomNode {
            id,
            name: UNKNOWN_ROOM.to_string(),
        });
    }
    sg.regions = regions;

    let agent_id = NodeId::new(NodeKind::Agent, obs.t);
    sg.agent = Some(AgentNode {
        id: agent_id,
        cell: obs.pose.cell,
        position: obs.pose.cell.center(grid.cell_size),
        heading: obs.pose.heading,
    });

    sg.edges.retain(|e| match e {
        Edge::Proximity { .. } => true,
        Edge::Belonging { child, .. } => child.kind == NodeKind::Frontier,
        Edge::Traversability { .. } => false,
    });
    for &room in sg.rooms.keys() {
        sg.edges.insert(Edge::Belonging { child: room, parent: sg.building });
    }
    for (&region, ri) in &region_room {
        sg.edges.insert(Edge::Belonging { child: region, parent: room_ids[ri] });
    }
    for (&id, obj) in &sg.objects {
        let region = *region_of
            .get(&obj.cell)
            .ok_or_else(|| SceneGraphError::ObjectOutsideRegions(id.to_string()))?;
        sg.edges.insert(Edge::Belonging { child: id, parent: region });
    }
    let agent_region = *region_of.get(&obs.pose.cell).ok_or(SceneGraphError::UnplacedAgent)?;
    sg.edges.insert(Edge::Belonging { child: agent_id, parent: agent_region });

    for (&c, &region) in &region_of {
        for n in [Cell::new(c.x + 1, c.y), Cell::new(c.x, c.y + 1)] {
            if let Some(&other) = region_of.get(&n) {
                if other != region {
                    sg.edges.insert(Edge::traversability(region, other));
                    let (ra, rb) = (room_ids[&region_room[&region]], room_ids[&region_room[&other]]);
                    if ra != rb {
                        sg.edges.insert(Edge::traversability(ra, rb));
                    }
                }
            }
        }
    }
    Ok(())
}
