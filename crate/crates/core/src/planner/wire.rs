//! JSON request and response documents exchanged with planners.
//!
//! Answers travel as letters (`"A"`, `"B"`, ...) and are mapped to indices at
//! this boundary. Every id in a response is checked against the graph the
//! request was built from, since a remote planner cannot be trusted to stay
//! inside the option set.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::{Action, ImageRole, PlannerError, PlannerInput, PlannerOutput};
use crate::scenegraph::{NodeId, NodeKind, SceneGraph};

pub fn answer_letter(index: usize) -> String {
    match u8::try_from(index) {
        Ok(i) if i < 26 => char::from(b'A' + i).to_string(),
        _ => format!("#{index}"),
    }
}

pub fn letter_index(letter: &str) -> Option<usize> {
    match letter.as_bytes() {
        [b] if b.is_ascii_uppercase() => Some(usize::from(b - b'A')),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireImage {
    pub role: ImageRole,
    pub rendering: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireRequest {
    pub question: String,
    pub choices: Vec<String>,
    pub scene_graph: Option<Box<RawValue>>,
    pub images: Vec<WireImage>,
    pub history: String,
    pub current_state: String,
    pub system_prompt: String,
}

impl WireRequest {
    pub fn from_input(input: &PlannerInput) -> Self {
        Self {
            question: input.question.clone(),
            choices: input.choices.clone(),
            scene_graph: input
                .scene_graph_json
                .as_ref()
                .map(|g| RawValue::from_string(g.clone()).expect("serialized graphs are valid JSON")),
            images: input
                .images
                .iter()
                .map(|i| WireImage { role: i.role, rendering: i.rendering() })
                .collect(),
            history: input.history.clone(),
            current_state: input.current_state.clone(),
            system_prompt: input.system_prompt.clone(),
        }
    }
}

pub fn encode_request(input: &PlannerInput) -> String {
    serde_json::to_string(&WireRequest::from_input(input)).expect("requests always serialize")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum WireAction {
    #[serde(rename = "Goto_object_node_step")]
    GotoObjectNode {
        room_id: String,
        region_id: String,
        object_id: String,
        explanation_room: String,
        explanation_obj: String,
    },
    #[serde(rename = "Goto_frontier_node_step")]
    GotoFrontierNode { frontier_id: String, explanation_frontier: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireResponse {
    pub answer: String,
    pub is_confident: bool,
    pub confidence_level: f64,
    pub explanation_ans: String,
    pub explanation_conf: String,
    pub action: Option<WireAction>,
    pub image_description: String,
    pub scene_graph_description: String,
}

impl WireResponse {
    pub fn from_output(out: &PlannerOutput) -> Self {
        Self {
            answer: answer_letter(out.answer_index),
            is_confident: out.is_confident,
            confidence_level: out.confidence_level,
            explanation_ans: out.explanation_ans.clone(),
            explanation_conf: out.explanation_conf.clone(),
            action: out.action.as_ref().map(|a| match a {
                Action::GotoObjectNode { room_id, region_id, object_id, explanation_room, explanation_obj } => {
                    WireAction::GotoObjectNode {
                        room_id: room_id.to_string(),
                        region_id: region_id.to_string(),
                        object_id: object_id.to_string(),
                        explanation_room: explanation_room.clone(),
                        explanation_obj: explanation_obj.clone(),
                    }
                }
                Action::GotoFrontierNode { frontier_id, explanation_frontier } => WireAction::GotoFrontierNode {
                    frontier_id: frontier_id.to_string(),
                    explanation_frontier: explanation_frontier.clone(),
                },
            }),
            image_description: out.image_description.clone(),
            scene_graph_description: out.scene_graph_description.clone(),
        }
    }
}

pub fn encode_planner_output(out: &PlannerOutput) -> String {
    serde_json::to_string(&WireResponse::from_output(out)).expect("responses always serialize")
}

/// Resolves `raw` to a node of `kind` present in `sg`.
fn known(sg: &SceneGraph, raw: &str, kind: NodeKind) -> Result<NodeId, PlannerError> {
    match raw.parse::<NodeId>() {
        Ok(id) if id.kind == kind && sg.contains(id) => Ok(id),
        _ => Err(PlannerError::UnknownNode(raw.to_string())),
    }
}

/// Object ids (`object_<n>`) mentioned anywhere in `text`.
fn mentioned_objects(text: &str) -> BTreeSet<NodeId> {
    text.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
        .filter_map(|tok| tok.parse::<NodeId>().ok())
        .filter(|id| id.kind == NodeKind::Object)
        .collect()
}

/// Parses and checks a planner response against the graph it answered.
pub fn validate_planner_output(raw: &str, sg: &SceneGraph, n_choices: usize) -> Result<PlannerOutput, PlannerError> {
    let wire: WireResponse = serde_json::from_str(raw).map_err(|e| PlannerError::SchemaError(e.to_string()))?;

    let answer_index = letter_index(&wire.answer)
        .ok_or_else(|| PlannerError::SchemaError(format!("answer `{}` is not a choice letter", wire.answer)))?;
    if answer_index >= n_choices {
        return Err(PlannerError::RangeError(format!(
            "answer {} but only {n_choices} choices",
            wire.answer
        )));
    }
    if !(0.0..=1.0).contains(&wire.confidence_level) {
        return Err(PlannerError::RangeError(format!(
            "confidence_level {} outside [0, 1]",
            wire.confidence_level
        )));
    }
    match (wire.is_confident, wire.action.is_some()) {
        (true, true) => return Err(PlannerError::SchemaError("a confident answer must not carry an action".into())),
        (false, false) => return Err(PlannerError::SchemaError("an unconfident answer needs an action".into())),
        _ => {}
    }

    let action = match wire.action {
        None => None,
        Some(WireAction::GotoObjectNode { room_id, region_id, object_id, explanation_room, explanation_obj }) => {
            let room = known(sg, &room_id, NodeKind::Room)?;
            let region = known(sg, &region_id, NodeKind::Region)?;
            let object = known(sg, &object_id, NodeKind::Object)?;
            if sg.parent(object) != Some(region) {
                return Err(PlannerError::HierarchyViolation(format!("{object} does not belong to {region}")));
            }
            if sg.parent(region) != Some(room) {
                return Err(PlannerError::HierarchyViolation(format!("{region} does not belong to {room}")));
            }
            Some(Action::GotoObjectNode {
                room_id: room,
                region_id: region,
                object_id: object,
                explanation_room,
                explanation_obj,
            })
        }
        Some(WireAction::GotoFrontierNode { frontier_id, explanation_frontier }) => {
            let frontier = known(sg, &frontier_id, NodeKind::Frontier)?;
            let connected: BTreeSet<NodeId> = sg.proximity_objects(frontier).into_iter().collect();
            let mentioned = mentioned_objects(&explanation_frontier);
            if let Some(stray) = mentioned.difference(&connected).next() {
                return Err(PlannerError::HierarchyViolation(format!(
                    "explanation cites {stray}, which is not connected to {frontier}"
                )));
            }
            if !connected.is_empty() && mentioned.is_empty() {
                return Err(PlannerError::HierarchyViolation(format!(
                    "explanation for {frontier} cites none of its connected objects"
                )));
            }
            Some(Action::GotoFrontierNode { frontier_id: frontier, explanation_frontier })
        }
    };

    Ok(PlannerOutput {
        answer_index,
        is_confident: wire.is_confident,
        confidence_level: wire.confidence_level,
        explanation_ans: wire.explanation_ans,
        explanation_conf: wire.explanation_conf,
        action,
        image_description: wire.image_description,
        scene_graph_description: wire.scene_graph_description,
    })
}
