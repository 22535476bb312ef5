//! JSON encoding of the graph as the planner sees it.
//!
//! The document nests regions and frontiers under their rooms and objects
//! under their regions. Cell sets, the agent heading and traversability
//! edges are not part of the document, so round trips are defined on
//! [`GraphDocument`]: `parse(serialize(sg)) == GraphDocument::from_graph(sg)`
//! and re-serializing a parsed document reproduces the same bytes.

use serde::{Deserialize, Serialize};

use super::{NodeKind, SceneGraph};
use crate::geom::Point2;

mod position {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use serde_json::value::RawValue;

    pub fn serialize<S: Serializer>(p: &[f64; 3], s: S) -> Result<S::Ok, S::Error> {
        let text = format!("[{:.3}, {:.3}, {:.3}]", p[0], p[1], p[2]);
        RawValue::from_string(text)
            .map_err(serde::ser::Error::custom)?
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 3], D::Error> {
        <[f64; 3]>::deserialize(d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub building: BuildingDoc,
    pub rooms: Vec<RoomDoc>,
    pub agent: Option<AgentDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingDoc {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoomDoc {
    pub id: String,
    pub name: String,
    pub regions: Vec<RegionDoc>,
    pub frontiers: Vec<FrontierDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionDoc {
    pub id: String,
    pub objects: Vec<ObjectDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDoc {
    pub id: String,
    pub label: String,
    #[serde(with = "position")]
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontierDoc {
    pub id: String,
    #[serde(with = "position")]
    pub centroid: [f64; 3],
    pub nearby_objects: Vec<NearbyObjectDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearbyObjectDoc {
    pub id: String,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentDoc {
    pub id: String,
    #[serde(with = "position")]
    pub position: [f64; 3],
    pub room_id: String,
    pub room_name: String,
}

/// Rounds to the 3 decimals the document carries.
fn pos3(p: Point2) -> [f64; 3] {
    let r = |v: f64| format!("{v:.3}").parse::<f64>().unwrap();
    [r(p.x), r(p.y), 0.0]
}

impl GraphDocument {
    pub fn from_graph(sg: &SceneGraph) -> Self {
        let rooms = sg
            .rooms
            .values()
            .map(|room| {
                let children = sg.children(room.id);
                let regions = children
                    .iter()
                    .filter(|c| c.kind == NodeKind::Region)
                    .map(|&region| RegionDoc {
                        id: region.to_string(),
                        objects: sg
                            .children(region)
                            .into_iter()
                            .filter_map(|o| sg.objects.get(&o))
                            .map(|o| ObjectDoc {
                                id: o.id.to_string(),
                                label: o.label.clone(),
                                position: pos3(o.position),
                            })
                            .collect(),
                    })
                    .collect();
                let frontiers = children
                    .iter()
                    .filter_map(|c| sg.frontiers.get(c))
                    .map(|f| FrontierDoc {
                        id: f.id.to_string(),
                        centroid: pos3(f.centroid),
                        nearby_objects: sg
                            .proximity_objects(f.id)
                            .into_iter()
                            .filter_map(|o| sg.objects.get(&o))
                            .map(|o| NearbyObjectDoc {
                                id: o.id.to_string(),
                                label: o.label.clone(),
                            })
                            .collect(),
                    })
                    .collect();
                RoomDoc {
                    id: room.id.to_string(),
                    name: room.name.clone(),
                    regions,
                    frontiers,
                }
            })
            .collect();
        let agent = sg.agent.as_ref().and_then(|a| {
            let room = sg.rooms.get(&sg.room_of(a.id)?)?;
            Some(AgentDoc {
                id: a.id.to_string(),
                position: pos3(a.position),
                room_id: room.id.to_string(),
                room_name: room.name.clone(),
            })
        });
        GraphDocument {
            building: BuildingDoc {
                id: sg.building.to_string(),
            },
            rooms,
            agent,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph documents always serialize")
    }

    pub fn object_ids(&self) -> impl Iterator<Item = &str> {
        self.rooms
            .iter()
            .flat_map(|r| r.regions.iter())
            .flat_map(|g| g.objects.iter())
            .map(|o| o.id.as_str())
    }
}

/// Deterministic compact JSON; equal graphs give byte-identical output.
pub fn serialize_scene_graph(sg: &SceneGraph) -> String {
    GraphDocument::from_graph(sg).to_json()
}

pub fn parse_scene_graph(text: &str) -> Result<GraphDocument, serde_json::Error> {
    serde_json::from_str(text)
}
