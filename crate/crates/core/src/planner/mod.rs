//! Planner protocol: what a planner sees, what it may answer, and how answers
//! are checked against the graph they were produced from.

mod history;
mod oracle;
mod remote;
mod wire;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::memory::{Snapshot, VisualMemory};
use crate::scenegraph::{serialize_scene_graph, AgentState, NodeId, SceneGraph};
use crate::worldsim::Question;

pub use history::{parse_history, update_history, ActionRef, History, HistoryEntry, HistoryParseError};
pub use oracle::{OracleTruth, ScriptedPlanner};
pub use remote::{remote_planner_call, RemoteConfig, RemotePlanner};
pub use wire::{
    answer_letter, encode_planner_output, encode_request, letter_index, validate_planner_output, WireAction,
    WireImage, WireRequest, WireResponse,
};

pub const SYSTEM_PROMPT: &str = include_str!("../../data/system_prompt_v1.txt");
pub const SYSTEM_PROMPT_VERSION: &str = "v1";

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum PlannerError {
    #[error("malformed planner output: {0}")]
    SchemaError(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("hierarchy violation: {0}")]
    HierarchyViolation(String),
    #[error("value out of range: {0}")]
    RangeError(String),
    #[error("no frontier left to explore")]
    NoFrontier,
    #[error("planner request timed out")]
    Timeout,
    #[error("planner transport failure: {0}")]
    TransportError(String),
    #[error("planner unreachable after {attempts} attempts: {last}")]
    RetriesExhausted { attempts: usize, last: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    #[default]
    None,
    SgOnly,
    VisOnly,
    NoEnrich,
    CurrView,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::None,
        Ablation::SgOnly,
        Ablation::VisOnly,
        Ablation::NoEnrich,
        Ablation::CurrView,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::SgOnly => "sg-only",
            Ablation::VisOnly => "vis-only",
            Ablation::NoEnrich => "no-enrich",
            Ablation::CurrView => "curr-view",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("unknown ablation `{0}` (expected none, sg-only, vis-only, no-enrich or curr-view)")]
pub struct ParseAblationError(String);

impl FromStr for Ablation {
    type Err = ParseAblationError;

    /// Accepts both `sg-only` and `sg_only` spellings.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str() == norm)
            .ok_or_else(|| ParseAblationError(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImageRole {
    Memory,
    CurrentView,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerImage {
    pub role: ImageRole,
    pub snapshot: Snapshot,
}

impl PlannerImage {
    pub fn rendering(&self) -> String {
        self.snapshot.render()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerInput {
    pub question: String,
    pub choices: Vec<String>,
    /// `None` when the graph is withheld.
    pub scene_graph_json: Option<String>,
    /// Memory views first, current view last.
    pub images: Vec<PlannerImage>,
    pub history: String,
    pub current_state: String,
    pub system_prompt: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    GotoObjectNode {
        room_id: NodeId,
        region_id: NodeId,
        object_id: NodeId,
        explanation_room: String,
        explanation_obj: String,
    },
    GotoFrontierNode {
        frontier_id: NodeId,
        explanation_frontier: String,
    },
}

impl Action {
    /// The node the agent should travel to.
    pub fn target(&self) -> NodeId {
        match self {
            Action::GotoObjectNode { object_id, .. } => *object_id,
            Action::GotoFrontierNode { frontier_id, .. } => *frontier_id,
        }
    }

    pub fn to_ref(&self) -> ActionRef {
        match self {
            Action::GotoObjectNode { room_id, region_id, object_id, .. } => ActionRef::Object {
                room: *room_id,
                region: *region_id,
                object: *object_id,
            },
            Action::GotoFrontierNode { frontier_id, .. } => ActionRef::Frontier { frontier: *frontier_id },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerOutput {
    pub answer_index: usize,
    pub is_confident: bool,
    pub confidence_level: f64,
    pub explanation_ans: String,
    pub explanation_conf: String,
    pub action: Option<Action>,
    pub image_description: String,
    pub scene_graph_description: String,
}

/// Assembles the planner's view of the current step.
///
/// `memory` views come first in memory order, then `current_view`. The graph
/// is withheld for `vis-only`; images are withheld for `sg-only`; `curr-view`
/// drops the memory views.
pub fn build_planner_input(
    question: &Question,
    sg: &SceneGraph,
    memory: &VisualMemory,
    history: &History,
    state: &AgentState,
    current_view: &Snapshot,
    ablation: Ablation,
) -> PlannerInput {
    let scene_graph_json = (ablation != Ablation::VisOnly).then(|| serialize_scene_graph(sg));
    let images = match ablation {
        Ablation::SgOnly => Vec::new(),
        Ablation::CurrView => vec![PlannerImage { role: ImageRole::CurrentView, snapshot: current_view.clone() }],
        _ => memory
            .snapshots()
            .map(|s| PlannerImage { role: ImageRole::Memory, snapshot: s.clone() })
            .chain(std::iter::once(PlannerImage { role: ImageRole::CurrentView, snapshot: current_view.clone() }))
            .collect(),
    };
    PlannerInput {
        question: question.text.clone(),
        choices: question.choices.clone(),
        scene_graph_json,
        images,
        history: history.rendered.clone(),
        current_state: state.rendered.clone(),
        system_prompt: SYSTEM_PROMPT.to_string(),
    }
}

/// Anything that maps a planner input to raw wire output.
pub trait Planner {
    fn plan(&mut self, input: &PlannerInput, sg: &SceneGraph) -> Result<String, PlannerError>;
}
