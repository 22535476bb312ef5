//! Layered metric-semantic scene graph.
//!
//! Levels, top to bottom: building (5), rooms (4), regions and frontiers (3),
//! objects and the agent (2). Edges between levels mean "belongs to"; edges
//! within a level mean "traversable between"; frontier-object edges mark
//! objects in the vicinity of a frontier.

mod serialize;
mod update;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::geom::{format_position, Cell, Heading, Point2};

pub use serialize::{parse_scene_graph, serialize_scene_graph, GraphDocument};
pub use update::update_scene_graph;
pub use validate::validate_scene_graph;

pub const UNKNOWN_ROOM: &str = "unknown room";
pub const DEFAULT_PROXIMITY_RADIUS_M: f64 = 2.0;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SceneGraphError {
    #[error("explored cell {0} maps to no room")]
    InconsistentRoomPartition(Cell),
    #[error("object {0} is not inside any explored region")]
    ObjectOutsideRegions(String),
    #[error("agent is not placed in a labeled room")]
    UnplacedAgent,
    #[error("bad node id `{0}`")]
    BadNodeId(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeKind {
    Building,
    Room,
    Region,
    Frontier,
    Object,
    Agent,
}

impl NodeKind {
    pub fn level(self) -> u8 {
        match self {
            NodeKind::Building => 5,
            NodeKind::Room => 4,
            NodeKind::Region | NodeKind::Frontier => 3,
            NodeKind::Object | NodeKind::Agent => 2,
        }
    }

    fn prefix(self) -> &'static str {
        match self {
            NodeKind::Building => "building",
            NodeKind::Room => "room",
            NodeKind::Region => "region",
            NodeKind::Frontier => "frontier",
            NodeKind::Object => "object",
            NodeKind::Agent => "agent",
        }
    }
}

/// Node id of the form `<kind>_<n>`. Orders by kind, then numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: usize,
}

impl NodeId {
    pub const fn new(kind: NodeKind, index: usize) -> Self {
        Self { kind, index }
    }

    pub fn level(self) -> u8 {
        self.kind.level()
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.kind.prefix(), self.index)
    }
}

impl FromStr for NodeId {
    type Err = SceneGraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SceneGraphError::BadNodeId(s.to_string());
        let (prefix, n) = s.rsplit_once('_').ok_or_else(bad)?;
        let kind = [
            NodeKind::Building,
            NodeKind::Room,
            NodeKind::Region,
            NodeKind::Frontier,
            NodeKind::Object,
            NodeKind::Agent,
        ]
        .into_iter()
        .find(|k| k.prefix() == prefix)
        .ok_or_else(bad)?;
        if n.is_empty() || !n.bytes().all(|b| b.is_ascii_digit()) || (n.len() > 1 && n.starts_with('0')) {
            return Err(bad());
        }
        Ok(NodeId::new(kind, n.parse().map_err(|_| bad())?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Belonging { child: NodeId, parent: NodeId },
    /// Stored with `a < b`.
    Traversability { a: NodeId, b: NodeId },
    Proximity { frontier: NodeId, object: NodeId },
}

impl Edge {
    pub fn traversability(x: NodeId, y: NodeId) -> Edge {
        Edge::Traversability { a: x.min(y), b: x.max(y) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoomNode {
    pub id: NodeId,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionNode {
    pub id: NodeId,
    /// Sorted explored free cells.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierNode {
    pub id: NodeId,
    pub centroid: Point2,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectNode {
    pub id: NodeId,
    pub label: String,
    pub cell: Cell,
    pub position: Point2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentNode {
    pub id: NodeId,
    pub cell: Cell,
    pub position: Point2,
    pub heading: Heading,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneGraph {
    pub building: NodeId,
    pub rooms: BTreeMap<NodeId, RoomNode>,
    pub regions: BTreeMap<NodeId, RegionNode>,
    pub frontiers: BTreeMap<NodeId, FrontierNode>,
    pub objects: BTreeMap<NodeId, ObjectNode>,
    pub agent: Option<AgentNode>,
    pub edges: BTreeSet<Edge>,
    /// Upper bound on frontier-object edge length, checked by the validator.
    pub proximity_radius_m: f64,
    /// Meters per grid cell, used to map centroids back onto cells.
    pub cell_size: f64,
}

impl Default for SceneGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl SceneGraph {
    /// A graph holding only the building node.
    pub fn new() -> Self {
        Self {
            building: NodeId::new(NodeKind::Building, 0),
            rooms: BTreeMap::new(),
            regions: BTreeMap::new(),
            frontiers: BTreeMap::new(),
            objects: BTreeMap::new(),
            agent: None,
            edges: BTreeSet::new(),
            proximity_radius_m: DEFAULT_PROXIMITY_RADIUS_M,
            cell_size: crate::geom::DEFAULT_CELL_SIZE,
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        match id.kind {
            NodeKind::Building => id == self.building,
            NodeKind::Room => self.rooms.contains_key(&id),
            NodeKind::Region => self.regions.contains_key(&id),
            NodeKind::Frontier => self.frontiers.contains_key(&id),
            NodeKind::Object => self.objects.contains_key(&id),
            NodeKind::Agent => self.agent.as_ref().is_some_and(|a| a.id == id),
        }
    }

    /// Parents reached through belonging edges.
    pub fn parents(&self, child: NodeId) -> Vec<NodeId> {
        // edges are few enough that a scan is fine
        self.edges
            .iter()
            .filter_map(|e| match e {
                Edge::Belonging { child: c, parent } if *c == child => Some(*parent),
                _ => None,
            })
            .collect()
    }

    pub fn parent(&self, child: NodeId) -> Option<NodeId> {
        self.parents(child).into_iter().next()
    }

    pub fn children(&self, parent: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter_map(|e| match e {
                Edge::Belonging { child, parent: p } if *p == parent => Some(*child),
                _ => None,
            })
            .collect()
    }

    /// Objects linked to a frontier by proximity edges.
    pub fn proximity_objects(&self, frontier: NodeId) -> Vec<NodeId> {
        self.edges
            .iter()
            .filter_map(|e| match e {
                Edge::Proximity { frontier: f, object } if *f == frontier => Some(*object),
                _ => None,
            })
            .collect()
    }

    pub fn proximity_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| matches!(e, Edge::Proximity { .. })).count()
    }

    /// Room reached by walking belonging edges upwards from `id`.
    pub fn room_of(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = id;
        for _ in 0..4 {
            if cur.kind == NodeKind::Room {
                return Some(cur);
            }
            cur = self.parent(cur)?;
        }
        None
    }

    /// Object node ids of every object in `room`, via its regions.
    pub fn objects_in_room(&self, room: NodeId) -> Vec<NodeId> {
        self.children(room)
            .into_iter()
            .filter(|c| c.kind == NodeKind::Region)
            .flat_map(|r| self.children(r))
            .filter(|c| c.kind == NodeKind::Object)
            .collect()
    }

    /// Region whose cells contain `c`.
    pub fn region_containing(&self, c: Cell) -> Option<NodeId> {
        self.regions
            .values()
            .find(|r| r.cells.binary_search(&c).is_ok())
            .map(|r| r.id)
    }

    pub fn node_counts(&self) -> NodeCounts {
        NodeCounts {
            rooms: self.rooms.len(),
            regions: self.regions.len(),
            frontiers: self.frontiers.len(),
            objects: self.objects.len(),
            proximity_edges: self.proximity_edge_count(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NodeCounts {
    pub rooms: usize,
    pub regions: usize,
    pub frontiers: usize,
    pub objects: usize,
    pub proximity_edges: usize,
}

/// The agent's current state as handed to the planner.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub node_id: String,
    pub position: Point2,
    pub room_id: String,
    pub room_name: String,
    pub rendered: String,
}

pub fn format_agent_state(sg: &SceneGraph) -> Result<AgentState, SceneGraphError> {
    let agent = sg.agent.as_ref().ok_or(SceneGraphError::UnplacedAgent)?;
    let room = sg
        .room_of(agent.id)
        .and_then(|r| sg.rooms.get(&r))
        .ok_or(SceneGraphError::UnplacedAgent)?;
    let rendered = format!(
        "The agent is currently at node {} at position {} in room {} {}",
        agent.id,
        format_position(agent.position),
        room.id,
        room.name
    );
    Ok(AgentState {
        node_id: agent.id.to_string(),
        position: agent.position,
        room_id: room.id.to_string(),
        room_name: room.name.clone(),
        rendered,
    })
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn node_ids_parse_and_order_numerically() {
        assert_eq!(id("object_10").to_string(), "object_10");
        assert!(id("object_9") < id("object_10"));
        for bad in ["object", "object_", "object_x", "thing_1", "object_01"] {
            assert!(bad.parse::<NodeId>().is_err(), "{bad}");
        }
    }

    #[test]
    fn agent_state_template() {
        let mut sg = two_room_graph();
        sg.agent.as_mut().unwrap().position = Point2::new(1.0, 2.0);
        let state = format_agent_state(&sg).unwrap();
        assert_eq!(
            state.rendered,
            "The agent is currently at node agent_3 at position [1.000, 2.000, 0.000] in room room_0 living room"
        );
        assert_eq!(format_agent_state(&sg).unwrap(), state);
    }

    #[test]
    fn agent_in_unlabeled_room_uses_current_name() {
        let mut sg = two_room_graph();
        sg.rooms.get_mut(&id("room_0")).unwrap().name = UNKNOWN_ROOM.into();
        assert!(format_agent_state(&sg).unwrap().rendered.ends_with("room_0 unknown room"));
    }

    #[test]
    fn missing_agent_is_unplaced() {
        let mut sg = two_room_graph();
        sg.agent = None;
        assert_eq!(format_agent_state(&sg), Err(SceneGraphError::UnplacedAgent));
    }

    #[test]
    fn hierarchy_queries() {
        let sg = two_room_graph();
        assert_eq!(sg.room_of(id("object_1")), Some(id("room_1")));
        assert_eq!(sg.objects_in_room(id("room_0")), vec![id("object_0")]);
        assert_eq!(sg.proximity_objects(id("frontier_0")), vec![id("object_1")]);
    }
}
