//! The closed loop: observe, map, enrich, remember, plan, check, act.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::enrichment::{
    enrich_frontiers, label_rooms_cached, EnrichmentConfig, EnrichmentError, LexiconLabeler, RoomLabelCache,
    RoomLabeler,
};
use crate::geom::{Cell, CellPose, Heading, Point2};
use crate::mapping::{
    cluster_frontiers, detect_frontier_cells, nearest_reachable_free_cell, reachable_from, shortest_path, CellState,
    FrontierTracker, MappingError, OccupancyGrid, DEFAULT_MIN_CLUSTER_SIZE,
};
use crate::memory::{
    extract_keywords, update_visual_memory, LexicalScorer, MemoryError, RelevanceScorer, Snapshot, VisualMemory,
    DEFAULT_CAPACITY, DEFAULT_SAMPLING_PERIOD,
};
use crate::planner::{
    build_planner_input, update_history, validate_planner_output, Ablation, Action, History, HistoryEntry,
    ImageRole, Planner, PlannerError, PlannerInput, PlannerOutput,
};
use crate::scenegraph::{format_agent_state, update_scene_graph, NodeCounts, NodeKind, SceneGraph, SceneGraphError};
use crate::worldsim::{in_fov, line_of_sight_cells, render_observation, Camera, Observation, World};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpisodeConfig {
    pub t_max: usize,
    pub conf_threshold: f64,
    /// Visual memory capacity.
    pub k: usize,
    pub j: usize,
    pub d: f64,
    pub sampling_period: usize,
    pub min_cluster_size: usize,
    pub ablation: Ablation,
    pub seed: u64,
    pub camera: Camera,
    /// Re-prompts allowed after an invalid planner output.
    pub reprompts: usize,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        let enrich = EnrichmentConfig::default();
        Self {
            t_max: 10,
            conf_threshold: 0.9,
            k: DEFAULT_CAPACITY,
            j: enrich.j,
            d: enrich.d,
            sampling_period: DEFAULT_SAMPLING_PERIOD,
            min_cluster_size: DEFAULT_MIN_CLUSTER_SIZE,
            ablation: Ablation::None,
            seed: 0,
            camera: Camera::default(),
            reprompts: 1,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), EpisodeError> {
        let bad = |m: &str| Err(EpisodeError::InvalidConfig(m.to_string()));
        if !(self.conf_threshold > 0.0 && self.conf_threshold <= 1.0) {
            return bad("conf_threshold must lie in (0, 1]");
        }
        if self.d.is_nan() || self.d <= 0.0 {
            return bad("d must be positive");
        }
        if self.sampling_period == 0 {
            return bad("sampling_period must be at least 1");
        }
        if self.min_cluster_size == 0 {
            return bad("min_cluster_size must be at least 1");
        }
        Ok(())
    }

    fn enrichment(&self) -> EnrichmentConfig {
        EnrichmentConfig { j: if self.ablation == Ablation::NoEnrich { 0 } else { self.j }, d: self.d }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EpisodeError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    SceneGraph(#[from] SceneGraphError),
    #[error(transparent)]
    Enrichment(#[from] EnrichmentError),
    #[error(transparent)]
    Memory(#[from] MemoryError),
    #[error("action targets {0}, which is no longer in the graph")]
    StaleNode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminationReason {
    Confident,
    Threshold,
    MaxSteps,
    PlannerError,
}

impl TerminationReason {
    pub fn as_str(self) -> &'static str {
        match self {
            TerminationReason::Confident => "Confident",
            TerminationReason::Threshold => "Threshold",
            TerminationReason::MaxSteps => "MaxSteps",
            TerminationReason::PlannerError => "PlannerError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(TerminationReason),
}

/// Stops on a confident answer, on confidence strictly above the threshold,
/// or once step `t` reaches `t_max`.
pub fn check_termination(out: &PlannerOutput, t: usize, cfg: &EpisodeConfig) -> Decision {
    if out.is_confident {
        Decision::Stop(TerminationReason::Confident)
    } else if out.confidence_level > cfg.conf_threshold {
        Decision::Stop(TerminationReason::Threshold)
    } else if t >= cfg.t_max {
        Decision::Stop(TerminationReason::MaxSteps)
    } else {
        Decision::Continue
    }
}

/// One transcript line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub state: String,
    pub action: Option<String>,
    pub answer: Option<usize>,
    pub is_confident: Option<bool>,
    pub confidence_level: Option<f64>,
    pub frontier_ids: Vec<String>,
    pub node_counts: NodeCounts,
    /// Meters traveled before this step's action.
    pub traj_len_so_far: f64,
    pub images: Vec<ImageRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl StepRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("step records always serialize")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub answer_index: Option<usize>,
    pub correct_index: usize,
    pub success: bool,
    pub planning_steps: usize,
    pub trajectory_length_m: f64,
    pub termination_reason: TerminationReason,
    pub transcript: Vec<StepRecord>,
    /// Agent cells visited, in order, starting at the spawn.
    pub path: Vec<CellPose>,
    /// Frontier centroids offered at the last planning step.
    pub final_frontiers: Vec<Point2>,
}

impl EpisodeResult {
    pub fn correct(&self) -> bool {
        self.answer_index == Some(self.correct_index)
    }

    pub fn transcript_jsonl(&self) -> String {
        self.transcript.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

/// Poses visited while carrying out an action and the view at each.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    /// Starts at the agent's current cell; one pose per path cell.
    pub trajectory: Vec<CellPose>,
    pub observations: Vec<Observation>,
    pub cells_moved: usize,
}

/// Where to walk and what to look at when standing there.
struct Goal {
    cell: Cell,
    /// Point faced on the way.
    point: Point2,
    /// Heading taken on arrival instead of facing `point`.
    final_heading: Option<Heading>,
}

fn goal_for(grid: &OccupancyGrid, sg: &SceneGraph, from: Cell, action: &Action, camera: &Camera) -> Result<Goal, EpisodeError> {
    let id = action.target();
    let stale = || EpisodeError::StaleNode(id.to_string());
    let unreachable = |p: Point2| MappingError::Unreachable { from, to: Cell::containing(p, grid.cell_size) };
    match id.kind {
        NodeKind::Object => {
            let pos = sg.objects.get(&id).ok_or_else(stale)?.position;
            let cell = nearest_reachable_free_cell(grid, from, pos).ok_or_else(|| unreachable(pos))?;
            Ok(Goal { cell, point: pos, final_heading: None })
        }
        NodeKind::Frontier => {
            let f = sg.frontiers.get(&id).ok_or_else(stale)?;
            // An arc-shaped frontier has its centroid deep in explored space,
            // so head for the member cell nearest the centroid instead.
            let reachable: BTreeSet<Cell> = reachable_from(grid, from).into_iter().collect();
            let cell = f
                .cells
                .iter()
                .filter(|c| reachable.contains(c))
                .min_by(|a, b| {
                    let (da, db) = (a.center(grid.cell_size).distance_sq(f.centroid), b.center(grid.cell_size).distance_sq(f.centroid));
                    da.total_cmp(&db).then(a.cmp(b))
                })
                .copied()
                .or_else(|| nearest_reachable_free_cell(grid, from, f.centroid))
                .ok_or_else(|| unreachable(f.centroid))?;
            Ok(Goal { cell, point: cell.center(grid.cell_size), final_heading: unknown_side_heading(grid, cell, camera) })
        }
        _ => Err(stale()),
    }
}

/// Heading for a look at the unexplored side of frontier cell `c`.
///
/// Only headings that keep some unknown neighbor in view qualify, since a
/// neighbor can never be occluded; among those the one covering the most
/// unknown cells within range and not hidden behind known walls wins, lowest
/// heading index on ties.
fn unknown_side_heading(grid: &OccupancyGrid, c: Cell, camera: &Camera) -> Option<Heading> {
    let is_unknown = |n: &Cell| grid.in_bounds(*n) && grid.get(*n) == CellState::Unknown;
    let near: Vec<Cell> = c.neighbors8().into_iter().filter(is_unknown).collect();
    if near.is_empty() {
        return None;
    }
    let reach = (camera.max_range_m / grid.cell_size).floor() as i32;
    let r2 = camera.max_range_m * camera.max_range_m / (grid.cell_size * grid.cell_size);
    let far: Vec<Cell> = (c.x - reach..=c.x + reach)
        .flat_map(|x| (c.y - reach..=c.y + reach).map(move |y| Cell::new(x, y)))
        .filter(|n| {
            let (dx, dy) = ((n.x - c.x) as f64, (n.y - c.y) as f64);
            dx * dx + dy * dy <= r2 + 1e-9
                && is_unknown(n)
                && line_of_sight_cells(c, *n)
                    .iter()
                    .all(|m| m == n || grid.get(*m) != CellState::Occupied)
        })
        .collect();
    let mut best: Option<(usize, Heading)> = None;
    for h in (0..8).map(Heading::from_index) {
        let pose = CellPose::new(c, h);
        if !near.iter().any(|n| in_fov(pose, *n, camera.fov_deg)) {
            continue;
        }
        let seen = far.iter().filter(|n| in_fov(pose, **n, camera.fov_deg)).count();
        if best.is_none_or(|(s, _)| seen > s) {
            best = Some((seen, h));
        }
    }
    best.map(|(_, h)| h)
}

/// Walks the shortest path towards the action's target, facing it at every
/// waypoint.
///
/// Object targets are approached via the reachable free cell nearest the
/// object; frontier targets via their member cell nearest the centroid, and
/// on arrival the agent faces the unexplored side. Views are stamped with
/// consecutive steps starting at `first_t`. The current cell counts as the
/// first waypoint, so even a zero-length move turns the agent and takes one
/// view.
pub fn execute_action(
    world: &World,
    grid: &OccupancyGrid,
    sg: &SceneGraph,
    action: &Action,
    camera: &Camera,
    first_t: usize,
) -> Result<Execution, EpisodeError> {
    let agent = sg.agent.as_ref().ok_or(SceneGraphError::UnplacedAgent)?;
    let goal = goal_for(grid, sg, agent.cell, action, camera)?;
    let path = shortest_path(grid, agent.cell, goal.cell)?;

    let face = |from: Cell, p: Point2| {
        let here = from.center(grid.cell_size);
        Heading::nearest_to(p.x - here.x, p.y - here.y)
    };
    let mut heading = agent.heading;
    let mut trajectory = Vec::with_capacity(path.len());
    let mut observations = Vec::with_capacity(path.len());
    for (i, &cell) in path.iter().enumerate() {
        let last = i + 1 == path.len();
        if let Some(h) = goal.final_heading.filter(|_| last).or_else(|| face(cell, goal.point)) {
            heading = h;
        }
        let pose = CellPose::new(cell, heading);
        observations.push(render_observation(world, pose, camera, first_t + i));
        trajectory.push(pose);
    }
    Ok(Execution {
        trajectory,
        observations,
        cells_moved: path.len() - 1,
    })
}

/// Hooks for watching an episode from outside, e.g. in tests.
pub trait EpisodeObserver {
    fn on_plan(&mut self, _t: usize, _sg: &SceneGraph, _grid: &OccupancyGrid, _input: &PlannerInput) {}
}

pub struct NoObserver;

impl EpisodeObserver for NoObserver {}

/// Pluggable pieces with deterministic defaults.
pub struct EpisodeDeps<'a> {
    pub labeler: &'a dyn RoomLabeler,
    pub scorer: &'a dyn RelevanceScorer,
}

static DEFAULT_LABELER: std::sync::OnceLock<LexiconLabeler> = std::sync::OnceLock::new();

impl Default for EpisodeDeps<'static> {
    fn default() -> Self {
        Self {
            labeler: DEFAULT_LABELER.get_or_init(LexiconLabeler::default),
            scorer: &LexicalScorer,
        }
    }
}

struct Agent<'w> {
    world: &'w World,
    cfg: &'w EpisodeConfig,
    grid: OccupancyGrid,
    sg: SceneGraph,
    next_t: usize,
    buffer: Vec<Snapshot>,
    current_view: Snapshot,
    path: Vec<CellPose>,
}

impl<'w> Agent<'w> {
    fn spawn(world: &'w World, cfg: &'w EpisodeConfig) -> Result<Self, EpisodeError> {
        let obs = render_observation(world, world.agent_spawn, &cfg.camera, 0);
        let mut agent = Self {
            world,
            cfg,
            grid: OccupancyGrid::unknown(world.width, world.height, world.cell_size),
            sg: SceneGraph::new(),
            next_t: 0,
            buffer: Vec::new(),
            current_view: obs.snapshot.clone(),
            path: vec![world.agent_spawn],
        };
        agent.absorb(&obs)?;
        agent.next_t = 1;
        Ok(agent)
    }

    fn absorb(&mut self, obs: &Observation) -> Result<(), EpisodeError> {
        self.grid.integrate(obs)?;
        update_scene_graph(&mut self.sg, obs, &self.grid, self.world)?;
        self.buffer.push(obs.snapshot.clone());
        self.current_view = obs.snapshot.clone();
        Ok(())
    }

    fn act(&mut self, action: &Action) -> Result<usize, EpisodeError> {
        let exec = execute_action(self.world, &self.grid, &self.sg, action, &self.cfg.camera, self.next_t)?;
        self.next_t += exec.observations.len();
        for obs in &exec.observations {
            self.absorb(obs)?;
        }
        self.path.extend(exec.trajectory.iter().skip(1).copied());
        Ok(exec.cells_moved)
    }
}

fn validated(
    planner: &mut dyn Planner,
    input: &PlannerInput,
    sg: &SceneGraph,
    n_choices: usize,
    reprompts: usize,
) -> Result<PlannerOutput, PlannerError> {
    let mut input = input.clone();
    let mut attempt = 0;
    loop {
        // transport problems and an exhausted map are not fixed by asking again
        let raw = planner.plan(&input, sg)?;
        let err = match validate_planner_output(&raw, sg, n_choices) {
            Ok(out) => return Ok(out),
            Err(e) => e,
        };
        if attempt >= reprompts {
            return Err(err);
        }
        attempt += 1;
        let note = format!("PREVIOUS OUTPUT REJECTED: {err}");
        input.history = if input.history.is_empty() { note } else { format!("{note}\n{}", input.history) };
    }
}

/// Runs one episode with the default labeler and scorer.
pub fn run_episode(world: &World, planner: &mut dyn Planner, cfg: &EpisodeConfig) -> Result<EpisodeResult, EpisodeError> {
    run_episode_with(world, planner, cfg, &EpisodeDeps::default(), &mut NoObserver)
}

pub fn run_episode_with(
    world: &World,
    planner: &mut dyn Planner,
    cfg: &EpisodeConfig,
    deps: &EpisodeDeps<'_>,
    observer: &mut dyn EpisodeObserver,
) -> Result<EpisodeResult, EpisodeError> {
    cfg.validate()?;
    let question = &world.question;
    let keywords = extract_keywords(&question.text)?;
    let enrich_cfg = cfg.enrichment();

    let mut agent = Agent::spawn(world, cfg)?;
    let mut tracker = FrontierTracker::new();
    let mut label_cache = RoomLabelCache::new();
    let mut memory = VisualMemory::new(cfg.k);
    let mut history = History::new();
    let mut transcript = Vec::new();
    let mut traveled_cells = 0usize;
    let mut last_answer = None;

    for t in 0.. {
        let clusters = tracker.assign(cluster_frontiers(
            &detect_frontier_cells(&agent.grid),
            cfg.min_cluster_size,
            agent.grid.cell_size,
        ));
        enrich_frontiers(&mut agent.sg, &clusters, &enrich_cfg);
        label_rooms_cached(&mut agent.sg, deps.labeler, &mut label_cache)?;
        memory = update_visual_memory(&memory, &agent.buffer, &keywords, deps.scorer, cfg.sampling_period);
        agent.buffer.clear();

        let state = format_agent_state(&agent.sg)?;
        let input = build_planner_input(question, &agent.sg, &memory, &history, &state, &agent.current_view, cfg.ablation);
        observer.on_plan(t, &agent.sg, &agent.grid, &input);

        let traj_len_so_far = traveled_cells as f64 * world.cell_size;
        let mut record = StepRecord {
            t,
            state: state.rendered.clone(),
            action: None,
            answer: None,
            is_confident: None,
            confidence_level: None,
            frontier_ids: agent.sg.frontiers.keys().map(|f| f.to_string()).collect(),
            node_counts: agent.sg.node_counts(),
            traj_len_so_far,
            images: input.images.iter().map(|i| i.role).collect(),
            error: None,
        };

        let out = match validated(planner, &input, &agent.sg, question.choices.len(), cfg.reprompts) {
            Ok(out) => out,
            Err(e) => {
                record.error = Some(e.to_string());
                transcript.push(record);
                return Ok(finish(world, agent, transcript, last_answer, t + 1, traveled_cells, TerminationReason::PlannerError));
            }
        };
        last_answer = Some(out.answer_index);
        record.action = out.action.as_ref().map(|a| a.to_ref().to_string());
        record.answer = Some(out.answer_index);
        record.is_confident = Some(out.is_confident);
        record.confidence_level = Some(out.confidence_level);
        transcript.push(record);

        let decision = check_termination(&out, t, cfg);
        history = update_history(
            &history,
            HistoryEntry::new(
                t,
                &state.rendered,
                out.answer_index,
                out.is_confident,
                out.confidence_level,
                out.action.as_ref().map(Action::to_ref),
            ),
        );
        match decision {
            Decision::Stop(reason) => {
                return Ok(finish(world, agent, transcript, last_answer, t + 1, traveled_cells, reason));
            }
            Decision::Continue => {
                let action = out.action.as_ref().expect("validated unconfident outputs carry an action");
                traveled_cells += agent.act(action)?;
            }
        }
    }
    unreachable!("the planning loop only exits by returning")
}

fn finish(
    world: &World,
    agent: Agent<'_>,
    transcript: Vec<StepRecord>,
    answer_index: Option<usize>,
    planning_steps: usize,
    traveled_cells: usize,
    reason: TerminationReason,
) -> EpisodeResult {
    let correct_index = world.question.correct_index;
    let success = answer_index == Some(correct_index)
        && matches!(reason, TerminationReason::Confident | TerminationReason::Threshold);
    EpisodeResult {
        answer_index,
        correct_index,
        success,
        planning_steps,
        trajectory_length_m: traveled_cells as f64 * world.cell_size,
        termination_reason: reason,
        transcript,
        path: agent.path,
        final_frontiers: agent.sg.frontiers.values().map(|f| f.centroid).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub n: usize,
    pub success_rate_pct: f64,
    /// Over successful episodes only; `None` without any.
    pub avg_planning_steps_success: Option<f64>,
    pub avg_traj_len_success_m: Option<f64>,
}

impl Metrics {
    /// Aggregates `(success, planning_steps, trajectory_length_m)` triples.
    pub fn from_outcomes(outcomes: impl IntoIterator<Item = (bool, usize, f64)>) -> Self {
        let mut n = 0;
        let (mut wins, mut steps, mut len) = (0usize, 0.0, 0.0);
        for (success, s, l) in outcomes {
            n += 1;
            if success {
                wins += 1;
                steps += s as f64;
                len += l;
            }
        }
        let mean = |total: f64| (wins > 0).then(|| total / wins as f64);
        Metrics {
            n,
            success_rate_pct: if n == 0 { 0.0 } else { 100.0 * wins as f64 / n as f64 },
            avg_planning_steps_success: mean(steps),
            avg_traj_len_success_m: mean(len),
        }
    }
}

pub fn compute_metrics(results: &[EpisodeResult]) -> Metrics {
    Metrics::from_outcomes(results.iter().map(|r| (r.success, r.planning_steps, r.trajectory_length_m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{OracleTruth, ScriptedPlanner};
    use crate::worldsim::{generate_world, validate_world, Occupancy, Question, Rect, Room, WorldObject, WorldParams};

    fn output(confident: bool, p: f64) -> PlannerOutput {
        PlannerOutput {
            answer_index: 0,
            is_confident: confident,
            confidence_level: p,
            explanation_ans: String::new(),
            explanation_conf: String::new(),
            action: None,
            image_description: String::new(),
            scene_graph_description: String::new(),
        }
    }

    #[test]
    fn termination_table() {
        let cfg = EpisodeConfig::default();
        assert_eq!(check_termination(&output(true, 0.2), 0, &cfg), Decision::Stop(TerminationReason::Confident));
        assert_eq!(check_termination(&output(false, 0.91), 0, &cfg), Decision::Stop(TerminationReason::Threshold));
        assert_eq!(check_termination(&output(false, 0.90), 0, &cfg), Decision::Continue);
        assert_eq!(check_termination(&output(false, 0.5), 10, &cfg), Decision::Stop(TerminationReason::MaxSteps));
        assert_eq!(check_termination(&output(false, 0.5), 9, &cfg), Decision::Continue);
    }

    fn result(success: bool, steps: usize, len: f64) -> EpisodeResult {
        EpisodeResult {
            answer_index: Some(0),
            correct_index: 0,
            success,
            planning_steps: steps,
            trajectory_length_m: len,
            termination_reason: TerminationReason::Confident,
            transcript: vec![],
            path: vec![],
            final_frontiers: vec![],
        }
    }

    #[test]
    fn metrics() {
        let empty = compute_metrics(&[]);
        assert_eq!((empty.n, empty.success_rate_pct, empty.avg_planning_steps_success), (0, 0.0, None));
        let m = compute_metrics(&[result(true, 2, 4.0), result(false, 7, 9.0)]);
        assert_eq!(m.success_rate_pct, 50.0);
        assert_eq!(m.avg_planning_steps_success, Some(2.0));
        assert_eq!(m.avg_traj_len_success_m, Some(4.0));
        assert_eq!(compute_metrics(&[result(true, 2, 0.0), result(true, 4, 0.0)]).avg_planning_steps_success, Some(3.0));
    }

    /// 7x3 corridor room; a mug at (5, 1) in view of the spawn at (1, 1).
    fn corridor(spawn_heading: Heading) -> World {
        let rows = ["#######", "#.....#", "#######"];
        let occ = rows
            .iter()
            .flat_map(|r| r.chars().map(|c| if c == '#' { Occupancy::Occupied } else { Occupancy::Free }))
            .collect();
        World::new(
            7,
            3,
            0.25,
            occ,
            vec![Room { id: "room_0".into(), category: "kitchen".into(), footprint: vec![Rect { x: 1, y: 1, w: 5, h: 1 }] }],
            vec![WorldObject { id: "object_0".into(), label: "mug".into(), cell: Cell::new(5, 1), attributes: Default::default() }],
            CellPose::new(Cell::new(1, 1), spawn_heading),
            Question {
                text: "What color is the mug?".into(),
                choices: vec!["red".into(), "blue".into()],
                correct_index: 1,
                target_object_ids: vec!["object_0".into()],
            },
        )
        .unwrap()
    }

    #[test]
    fn visible_target_answers_in_one_step() {
        let world = corridor(Heading::E);
        assert!(validate_world(&world).is_empty());
        let cfg = EpisodeConfig::default();
        let mut planner = ScriptedPlanner::new(OracleTruth::from_world(&world).unwrap(), cfg.ablation, cfg.seed);
        let r = run_episode(&world, &mut planner, &cfg).unwrap();
        assert!(r.success);
        assert_eq!(r.planning_steps, 1);
        assert_eq!(r.trajectory_length_m, 0.0);
    }

    #[test]
    fn t_max_zero_stops_after_one_step() {
        // facing away, the mug is not seen at spawn; the only frontier is a single cell
        let world = corridor(Heading::W);
        let cfg = EpisodeConfig { t_max: 0, min_cluster_size: 1, ..Default::default() };
        let mut planner = ScriptedPlanner::new(OracleTruth::from_world(&world).unwrap(), cfg.ablation, cfg.seed);
        let r = run_episode(&world, &mut planner, &cfg).unwrap();
        assert_eq!(r.planning_steps, 1);
        assert_eq!(r.termination_reason, TerminationReason::MaxSteps);
        assert!(!r.success);
    }

    #[test]
    fn adjacent_object_is_one_move_away_and_faced() {
        let world = corridor(Heading::W);
        let mut grid = OccupancyGrid::unknown(7, 3, 0.25);
        let mut sg = SceneGraph::new();
        // observe the whole corridor from (4, 1) facing east, then stand there
        let pose = CellPose::new(Cell::new(4, 1), Heading::E);
        let obs = render_observation(&world, pose, &Camera::default(), 0);
        grid.integrate(&obs).unwrap();
        update_scene_graph(&mut sg, &obs, &grid, &world).unwrap();
        let object_id = "object_0".parse().unwrap();
        let region = sg.parent(object_id).unwrap();
        let action = Action::GotoObjectNode {
            room_id: sg.parent(region).unwrap(),
            region_id: region,
            object_id,
            explanation_room: String::new(),
            explanation_obj: String::new(),
        };
        let exec = execute_action(&world, &grid, &sg, &action, &Camera::default(), 1).unwrap();
        assert_eq!(exec.cells_moved, 1);
        assert_eq!(exec.trajectory.len(), 2);
        assert_eq!(exec.trajectory[1].cell, Cell::new(5, 1));
        assert_eq!(exec.trajectory[0].heading, Heading::E);
        assert_eq!(exec.observations.iter().map(|o| o.t).collect::<Vec<_>>(), vec![1, 2]);
    }

    /// 15x15 open room, agent in the middle facing east.
    fn open_room() -> World {
        let n = 15;
        let occ = (0..n * n)
            .map(|i| {
                let (x, y) = (i % n, i / n);
                if x == 0 || y == 0 || x == n - 1 || y == n - 1 { Occupancy::Occupied } else { Occupancy::Free }
            })
            .collect();
        World::new(
            n,
            n,
            0.25,
            occ,
            vec![Room { id: "room_0".into(), category: "office".into(), footprint: vec![Rect { x: 1, y: 1, w: n - 2, h: n - 2 }] }],
            vec![WorldObject { id: "object_0".into(), label: "desk".into(), cell: Cell::new(2, 2), attributes: Default::default() }],
            CellPose::new(Cell::new(7, 7), Heading::E),
            Question {
                text: "What color is the desk?".into(),
                choices: vec!["red".into(), "blue".into()],
                correct_index: 0,
                target_object_ids: vec!["object_0".into()],
            },
        )
        .unwrap()
    }

    #[test]
    fn frontier_moves_always_reveal_something() {
        let world = open_room();
        let camera = Camera::default();
        let mut grid = OccupancyGrid::unknown(15, 15, 0.25);
        let mut sg = SceneGraph::new();
        let obs = render_observation(&world, world.agent_spawn, &camera, 0);
        grid.integrate(&obs).unwrap();
        update_scene_graph(&mut sg, &obs, &grid, &world).unwrap();
        let clusters = FrontierTracker::new().assign(cluster_frontiers(&detect_frontier_cells(&grid), 1, 0.25));
        enrich_frontiers(&mut sg, &clusters, &EnrichmentConfig::default());
        assert!(!sg.frontiers.is_empty());
        for f in sg.frontiers.values() {
            let action = Action::GotoFrontierNode { frontier_id: f.id, explanation_frontier: String::new() };
            let exec = execute_action(&world, &grid, &sg, &action, &camera, 1).unwrap();
            let end = exec.trajectory.last().unwrap();
            assert!(f.cells.contains(&end.cell), "{} ends off the frontier at {:?}", f.id, end.cell);
            let last = exec.observations.last().unwrap();
            assert!(
                last.visible_cells.iter().any(|(c, _)| grid.get(*c) == CellState::Unknown),
                "{} reveals nothing from {:?}",
                f.id,
                end
            );
        }
    }

    #[test]
    fn episodes_are_deterministic() {
        let world = generate_world(4, &WorldParams::default()).unwrap();
        let cfg = EpisodeConfig::default();
        let run = || {
            let mut planner = ScriptedPlanner::new(OracleTruth::from_world(&world).unwrap(), cfg.ablation, cfg.seed);
            run_episode(&world, &mut planner, &cfg).unwrap()
        };
        assert_eq!(run(), run());
    }

    struct Garbage(usize);

    impl Planner for Garbage {
        fn plan(&mut self, input: &PlannerInput, _: &SceneGraph) -> Result<String, PlannerError> {
            self.0 += 1;
            if self.0 == 2 {
                assert!(input.history.starts_with("PREVIOUS OUTPUT REJECTED: "));
            }
            Ok("not json".into())
        }
    }

    #[test]
    fn invalid_output_is_reprompted_once_then_fails() {
        let world = corridor(Heading::E);
        let mut planner = Garbage(0);
        let r = run_episode(&world, &mut planner, &EpisodeConfig::default()).unwrap();
        assert_eq!(planner.0, 2);
        assert_eq!(r.termination_reason, TerminationReason::PlannerError);
        assert!(!r.success);
        assert!(r.transcript[0].error.is_some());
    }
}
