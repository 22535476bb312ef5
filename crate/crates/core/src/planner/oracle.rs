//! Scripted planner that knows the ground truth. It answers as soon as a
//! target object shows up in its evidence, walks to a target it has mapped but
//! not yet viewed, and otherwise picks the frontier whose nearby objects
//! best match the question.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::wire::encode_planner_output;
use super::{Ablation, Action, Planner, PlannerError, PlannerInput, PlannerOutput};
use crate::lexicon::tokenize;
use crate::memory::{extract_keywords, MemoryError};
use crate::scenegraph::{NodeId, SceneGraph};
use crate::worldsim::World;

/// What the scripted planner is allowed to know about the episode.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTruth {
    pub correct_index: usize,
    pub target_ids: BTreeSet<NodeId>,
    pub target_labels: BTreeSet<String>,
    pub keywords: BTreeSet<String>,
}

impl OracleTruth {
    pub fn from_world(world: &World) -> Result<Self, MemoryError> {
        let q = &world.question;
        let mut target_ids = BTreeSet::new();
        let mut target_labels = BTreeSet::new();
        for raw in &q.target_object_ids {
            if let Ok(id) = raw.parse::<NodeId>() {
                target_ids.insert(id);
            }
            if let Some(o) = world.object(raw) {
                target_labels.insert(o.label.clone());
            }
        }
        Ok(Self {
            correct_index: q.correct_index,
            target_ids,
            target_labels,
            keywords: extract_keywords(&q.text)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ScriptedPlanner {
    truth: OracleTruth,
    ablation: Ablation,
    rng: ChaCha8Rng,
    random_picks: Vec<NodeId>,
}

impl ScriptedPlanner {
    /// `seed` drives the random frontier choice used without a scene graph.
    pub fn new(truth: OracleTruth, ablation: Ablation, seed: u64) -> Self {
        Self {
            truth,
            ablation,
            rng: ChaCha8Rng::seed_from_u64(seed),
            random_picks: Vec::new(),
        }
    }

    /// Frontiers chosen by the random policy so far, in order.
    pub fn random_picks(&self) -> &[NodeId] {
        &self.random_picks
    }

    pub fn decide(&mut self, input: &PlannerInput, sg: &SceneGraph) -> Result<PlannerOutput, PlannerError> {
        let mut evidence: BTreeSet<&str> = input
            .images
            .iter()
            .flat_map(|i| i.snapshot.labels.iter().map(String::as_str))
            .collect();
        if self.ablation == Ablation::SgOnly {
            evidence.extend(sg.objects.values().map(|o| o.label.as_str()));
        }
        if let Some(seen) = evidence.iter().find(|l| self.truth.target_labels.contains(**l)) {
            return Ok(PlannerOutput {
                answer_index: self.truth.correct_index,
                is_confident: true,
                confidence_level: 1.0,
                explanation_ans: format!("the {seen} is in view"),
                explanation_conf: "a target object has been observed".into(),
                action: None,
                image_description: describe_images(input),
                scene_graph_description: describe_graph(sg),
            });
        }

        let graph_visible = input.scene_graph_json.is_some();
        let target = self.truth.target_ids.iter().find(|id| sg.objects.contains_key(id)).copied();
        let action = match target {
            Some(object) if graph_visible => {
                let region = sg.parent(object).ok_or_else(|| PlannerError::UnknownNode(object.to_string()))?;
                let room = sg.parent(region).ok_or_else(|| PlannerError::UnknownNode(region.to_string()))?;
                let label = &sg.objects[&object].label;
                let room_name = sg.rooms.get(&room).map_or("unknown room", |r| r.name.as_str());
                Action::GotoObjectNode {
                    room_id: room,
                    region_id: region,
                    object_id: object,
                    explanation_room: format!("{room} ({room_name}) holds the {label}"),
                    explanation_obj: format!("{object} is the {label} the question asks about"),
                }
            }
            _ => {
                let frontier = self.pick_frontier(sg)?;
                let cited: Vec<String> = sg
                    .proximity_objects(frontier)
                    .into_iter()
                    .filter_map(|o| sg.objects.get(&o))
                    .map(|o| format!("{} ({})", o.id, o.label))
                    .collect();
                let explanation_frontier = if cited.is_empty() {
                    "no objects are connected to this frontier yet".to_string()
                } else {
                    format!("connected objects: {}", cited.join(", "))
                };
                Action::GotoFrontierNode { frontier_id: frontier, explanation_frontier }
            }
        };
        Ok(PlannerOutput {
            answer_index: 0,
            is_confident: false,
            confidence_level: 0.0,
            explanation_ans: "no target object observed yet".into(),
            explanation_conf: "more exploration is needed".into(),
            action: Some(action),
            image_description: describe_images(input),
            scene_graph_description: describe_graph(sg),
        })
    }

    fn pick_frontier(&mut self, sg: &SceneGraph) -> Result<NodeId, PlannerError> {
        let frontiers: Vec<NodeId> = sg.frontiers.keys().copied().collect();
        if frontiers.is_empty() {
            return Err(PlannerError::NoFrontier);
        }
        if self.ablation == Ablation::VisOnly {
            let pick = frontiers[self.rng.random_range(0..frontiers.len())];
            self.random_picks.push(pick);
            return Ok(pick);
        }
        let agent = sg.agent.as_ref().map(|a| a.position);
        let overlap = |f: NodeId| -> usize {
            let tokens: BTreeSet<String> = sg
                .proximity_objects(f)
                .into_iter()
                .filter_map(|o| sg.objects.get(&o))
                .flat_map(|o| tokenize(&o.label))
                .collect();
            self.truth.keywords.iter().filter(|k| tokens.contains(*k)).count()
        };
        let dist = |f: NodeId| agent.map_or(0.0, |a| sg.frontiers[&f].centroid.distance(a));
        Ok(frontiers
            .into_iter()
            .min_by(|&a, &b| {
                overlap(b)
                    .cmp(&overlap(a))
                    .then(dist(a).total_cmp(&dist(b)))
                    .then(a.cmp(&b))
            })
            .expect("non-empty"))
    }
}

fn describe_images(input: &PlannerInput) -> String {
    format!("{} views", input.images.len())
}

fn describe_graph(sg: &SceneGraph) -> String {
    let c = sg.node_counts();
    format!(
        "{} rooms, {} regions, {} frontiers, {} objects",
        c.rooms, c.regions, c.frontiers, c.objects
    )
}

impl Planner for ScriptedPlanner {
    fn plan(&mut self, input: &PlannerInput, sg: &SceneGraph) -> Result<String, PlannerError> {
        self.decide(input, sg).map(|out| encode_planner_output(&out))
    }
}
