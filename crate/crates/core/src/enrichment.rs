//! Semantic enrichment: room names from the objects they contain, and
//! frontier nodes linked to the objects around them.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::geom::Cell;
use crate::http::{post_json, HttpError};
use crate::lexicon::{lexicon, Lexicon};
use crate::mapping::FrontierCluster;
use crate::scenegraph::{Edge, FrontierNode, NodeId, NodeKind, SceneGraph, UNKNOWN_ROOM};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnrichmentConfig {
    /// Max proximity edges per frontier.
    pub j: usize,
    /// Max frontier-object distance in meters.
    pub d: f64,
}

impl Default for EnrichmentConfig {
    fn default() -> Self {
        Self { j: 3, d: 2.0 }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum EnrichmentError {
    #[error("labeler failed for {room}: {reason}")]
    LabelerFailure { room: String, reason: String },
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("{0}")]
pub struct LabelerError(pub String);

/// Names a room from the labels of the objects seen in it.
pub trait RoomLabeler: Send + Sync {
    fn label(&self, object_labels: &[String]) -> Result<String, LabelerError>;
}

/// Lexicon vote: each label votes for every room category it lists. Most
/// votes wins; ties go to the alphabetically first category.
#[derive(Debug, Clone, Copy)]
pub struct LexiconLabeler {
    lexicon: &'static Lexicon,
}

impl Default for LexiconLabeler {
    fn default() -> Self {
        Self { lexicon: lexicon() }
    }
}

impl RoomLabeler for LexiconLabeler {
    fn label(&self, object_labels: &[String]) -> Result<String, LabelerError> {
        let mut votes: BTreeMap<&str, usize> = BTreeMap::new();
        for l in object_labels {
            if let Some(entry) = self.lexicon.get(l) {
                for room in &entry.rooms {
                    *votes.entry(room).or_default() += 1;
                }
            }
        }
        // BTreeMap iterates alphabetically, so the first maximum wins ties
        let best = votes
            .iter()
            .fold(None::<(&str, usize)>, |best, (&room, &n)| match best {
                Some((_, m)) if m >= n => best,
                _ => Some((room, n)),
            });
        Ok(best.map_or(UNKNOWN_ROOM, |(room, _)| room).to_string())
    }
}

pub const ROOM_PROMPT_PREFIX: &str = "Which room are these objects ";
pub const ROOM_PROMPT_SUFFIX: &str = " most likely located in?";

/// The question sent to a remote labeler for a list of object labels.
pub fn room_prompt(object_labels: &[String]) -> String {
    format!("{ROOM_PROMPT_PREFIX}{}{ROOM_PROMPT_SUFFIX}", object_labels.join(", "))
}

#[derive(Debug, Serialize)]
struct LabelRequest<'a> {
    objects: &'a [String],
    prompt: String,
}

#[derive(Debug, Deserialize)]
struct LabelResponse {
    room_name: String,
}

/// Asks an HTTP endpoint to name the room.
#[derive(Debug, Clone)]
pub struct RemoteLabeler {
    pub endpoint: String,
    pub timeout: Duration,
}

impl RemoteLabeler {
    pub fn new(endpoint: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(30),
        }
    }

    pub fn request_body(object_labels: &[String]) -> String {
        serde_json::to_string(&LabelRequest {
            objects: object_labels,
            prompt: room_prompt(object_labels),
        })
        .expect("label requests always serialize")
    }
}

impl RoomLabeler for RemoteLabeler {
    fn label(&self, object_labels: &[String]) -> Result<String, LabelerError> {
        let body = Self::request_body(object_labels);
        let text = post_json(&self.endpoint, &body, self.timeout).map_err(|e: HttpError| LabelerError(e.to_string()))?;
        let resp: LabelResponse =
            serde_json::from_str(&text).map_err(|e| LabelerError(format!("bad labeler response: {e}")))?;
        let name = resp.room_name.trim();
        if name.is_empty() {
            return Err(LabelerError("labeler returned an empty room name".into()));
        }
        Ok(name.to_string())
    }
}

/// Remembers the object labels each room was last named from, so a room is
/// only relabeled when its contents change.
#[derive(Debug, Clone, Default)]
pub struct RoomLabelCache {
    seen: BTreeMap<NodeId, (Vec<String>, String)>,
}

impl RoomLabelCache {
    pub fn new() -> Self {
        Self::default()
    }
}

fn room_labels(sg: &SceneGraph, room: NodeId) -> Vec<String> {
    let mut labels: Vec<String> = sg
        .objects_in_room(room)
        .into_iter()
        .filter_map(|o| sg.objects.get(&o))
        .map(|o| o.label.clone())
        .collect();
    labels.sort();
    labels
}

/// Renames every room from the objects under it; empty rooms become
/// "unknown room". Topology is untouched.
pub fn label_rooms(sg: &mut SceneGraph, labeler: &dyn RoomLabeler) -> Result<(), EnrichmentError> {
    label_rooms_cached(sg, labeler, &mut RoomLabelCache::new())
}

pub fn label_rooms_cached(
    sg: &mut SceneGraph,
    labeler: &dyn RoomLabeler,
    cache: &mut RoomLabelCache,
) -> Result<(), EnrichmentError> {
    let ids: Vec<NodeId> = sg.rooms.keys().copied().collect();
    for id in ids {
        let labels = room_labels(sg, id);
        let name = match cache.seen.get(&id) {
            Some((prev, name)) if *prev == labels => name.clone(),
            _ if labels.is_empty() => UNKNOWN_ROOM.to_string(),
            _ => labeler.label(&labels).map_err(|e| EnrichmentError::LabelerFailure {
                room: id.to_string(),
                reason: e.0,
            })?,
        };
        cache.seen.insert(id, (labels, name.clone()));
        if let Some(room) = sg.rooms.get_mut(&id) {
            room.name = name;
        }
    }
    Ok(())
}

/// Room a frontier belongs to: the room of the region holding its centroid
/// cell, else of the explored cell nearest the centroid.
fn frontier_room(sg: &SceneGraph, cluster: &FrontierCluster) -> Option<NodeId> {
    let cs = sg.cell_size;
    let centroid_cell = Cell::containing(cluster.centroid, cs);
    let region = sg.region_containing(centroid_cell).or_else(|| {
        sg.regions
            .values()
            .flat_map(|r| r.cells.iter().map(move |c| (*c, r.id)))
            .min_by(|(a, _), (b, _)| {
                a.center(cs)
                    .distance_sq(cluster.centroid)
                    .total_cmp(&b.center(cs).distance_sq(cluster.centroid))
                    .then(a.cmp(b))
            })
            .map(|(_, r)| r)
    })?;
    sg.room_of(region)
}

/// Objects to link to a frontier at `centroid`: nearest first, ties by
/// smaller id, at most `j`, none farther than `d`.
pub fn nearest_objects(sg: &SceneGraph, centroid: crate::geom::Point2, cfg: &EnrichmentConfig) -> Vec<NodeId> {
    let mut near: Vec<(f64, NodeId)> = sg
        .objects
        .values()
        .map(|o| (o.position.distance(centroid), o.id))
        .filter(|(dist, _)| *dist <= cfg.d)
        .collect();
    near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    near.into_iter().take(cfg.j).map(|(_, id)| id).collect()
}

/// Replaces all frontier nodes with one node per cluster, each attached to
/// its room and linked to its nearby objects. Idempotent.
pub fn enrich_frontiers(sg: &mut SceneGraph, clusters: &[FrontierCluster], cfg: &EnrichmentConfig) {
    sg.frontiers.clear();
    sg.edges.retain(|e| match e {
        Edge::Proximity { .. } => false,
        Edge::Belonging { child, .. } => child.kind != NodeKind::Frontier,
        Edge::Traversability { a, b } => a.kind != NodeKind::Frontier && b.kind != NodeKind::Frontier,
    });
    sg.proximity_radius_m = cfg.d;

    let mut used = BTreeSet::new();
    for (i, cluster) in clusters.iter().enumerate() {
        let id = match cluster.id.parse::<NodeId>() {
            Ok(id) if id.kind == NodeKind::Frontier && !used.contains(&id) => id,
            _ => NodeId::new(NodeKind::Frontier, i),
        };
        used.insert(id);
        let Some(room) = frontier_room(sg, cluster) else {
            continue;
        };
        sg.frontiers.insert(
            id,
            FrontierNode {
                id,
                centroid: cluster.centroid,
                cells: cluster.cells.clone(),
            },
        );
        sg.edges.insert(Edge::Belonging { child: id, parent: room });
        for object in nearest_objects(sg, cluster.centroid, cfg) {
            sg.edges.insert(Edge::Proximity { frontier: id, object });
        }
    }
}
