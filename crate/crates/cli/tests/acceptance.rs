//! Acceptance checks 1 to 11. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use common::*;
use eqa_cli::output::read_metrics;
use eqa_core::enrichment::{enrich_frontiers, EnrichmentConfig};
use eqa_core::episode::{
    check_termination, run_episode_with, Decision, EpisodeConfig, EpisodeDeps, EpisodeObserver, TerminationReason,
};
use eqa_core::mapping::{detect_frontier_cells, shortest_path, CellState, OccupancyGrid};
use eqa_core::memory::{extract_keywords, update_visual_memory, LexicalScorer, Snapshot, VisualMemory, DEFAULT_CAPACITY};
use eqa_core::planner::{
    encode_planner_output, parse_history, update_history, validate_planner_output, Ablation, ActionRef, History,
    HistoryEntry, OracleTruth, PlannerError, PlannerInput, PlannerOutput, ScriptedPlanner, WireRequest,
    WireResponse,
};
use eqa_core::scenegraph::{parse_scene_graph, serialize_scene_graph, validate_scene_graph, Edge, NodeId, SceneGraph};
use eqa_core::geom::{Cell, CellPose, Heading};
use eqa_core::worldsim::{generate_world, World, WorldParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Named<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn core_fixture(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn batch(dir: &Path, out: &str) -> Result<std::time::Duration, String> {
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_eqa"))
        .current_dir(dir)
        .args(["run", "--planner", "scripted", "--seeds", "0..24", "--out", out])
        .output()
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    ensure(o.status.success(), || format!("eqa run failed: {}", String::from_utf8_lossy(&o.stderr)))?;
    Ok(took)
}

fn c1_oracle_completeness(dir: &Path) -> Check {
    let took = batch(dir, "c1")?;
    let rows = read_metrics(&dir.join("c1/metrics.csv")).map_err(|e| e.to_string())?;
    let wins = rows.iter().filter(|r| r.success).count();
    let max_steps = rows.iter().map(|r| r.planning_steps).max().unwrap_or(0);
    ensure(rows.len() == 25, || format!("{} episodes", rows.len()))?;
    ensure(wins == 25, || format!("{wins}/25 succeeded"))?;
    ensure(max_steps <= 10, || format!("an episode took {max_steps} planning steps"))?;
    ensure(took.as_secs_f64() < 30.0, || format!("took {took:?}"))?;
    Ok(format!("25/25 success, max {max_steps} planning steps, {:.2} s", took.as_secs_f64()))
}

fn c2_frontier() -> Check {
    let mut mismatched = 0;
    for seed in 0..100 {
        let mut r = rng(seed);
        let (w, h) = (r.random_range(1..30), r.random_range(1..30));
        let p_free = r.random_range(0.1..0.8);
        let g = random_grid(&mut r, w, h, p_free, (1.0 - p_free) / 2.0);
        mismatched += detect_frontier_cells(&g).symmetric_difference(&brute_frontier(&g)).count();
    }
    ensure(mismatched == 0, || format!("{mismatched} mismatched cells"))?;
    Ok("100 grids, 0 mismatched cells".into())
}

fn c3_enrichment() -> Check {
    let defaults = EnrichmentConfig::default();
    ensure(defaults.j == 3 && defaults.d == 2.0, || format!("defaults {defaults:?}"))?;
    let ep = EpisodeConfig::default();
    ensure(ep.j == 3 && ep.d == 2.0, || format!("episode defaults j={} d={}", ep.j, ep.d))?;
    let mut edges = 0;
    for seed in 0..100 {
        let mut case = random_enrich_case(&mut rng(20_000 + seed));
        enrich_frontiers(&mut case.sg, &case.clusters, &case.cfg);
        let got = proximity_map(&case.sg);
        ensure(got.len() == case.clusters.len(), || format!("config {seed}: frontier count"))?;
        for cluster in &case.clusters {
            let id: NodeId = cluster.id.parse().map_err(|e| format!("{e:?}"))?;
            let expected = knn_oracle(&case.objects, cluster.centroid, &case.cfg);
            edges += expected.len();
            ensure(got[&id] == expected, || format!("config {seed}, {id}: {:?} vs {expected:?}", got[&id]))?;
        }
    }
    Ok(format!("100 configs, {edges} edges identical; defaults j=3, d=2.0 m"))
}

fn c4_paths() -> Check {
    let (mut solved, mut seed) = (0, 0);
    while solved < 200 {
        seed += 1;
        let mut r = rng(10_000 + seed);
        let (w, h) = (r.random_range(2..25), r.random_range(2..25));
        let g = random_grid(&mut r, w, h, 0.7, 0.3);
        let free: Vec<Cell> = g.free_cells().collect();
        if free.len() < 2 {
            continue;
        }
        let (s, t) = (free[r.random_range(0..free.len())], free[r.random_range(0..free.len())]);
        let Some(expected) = bfs_len(&g, s, t) else { continue };
        let path = shortest_path(&g, s, t).map_err(|e| format!("instance {seed}: {e}"))?;
        ensure(path.len() - 1 == expected, || format!("instance {seed}: {} vs {expected}", path.len() - 1))?;
        ensure(path.iter().all(|c| g.get(*c) == CellState::Free), || format!("instance {seed}: non-free cell"))?;
        solved += 1;
    }
    Ok("200 solvable instances, lengths equal BFS, all cells Free".into())
}

fn c5_memory() -> Check {
    ensure(DEFAULT_CAPACITY == 2 && EpisodeConfig::default().k == 2, || "K default is not 2".into())?;
    let labels = ["mug", "red mug", "sink", "stove", "towel", "lamp"];
    let questions = ["What color is the mug?", "Is the stove switched on or off?", "Where is the towel?"];
    for seed in 0..100 {
        let mut r = rng(30_000 + seed);
        let keywords = extract_keywords(questions[r.random_range(0..questions.len())]).map_err(|e| e.to_string())?;
        let k = r.random_range(0..5);
        let period = r.random_range(0..5);
        let n = r.random_range(0..12);
        let buffer: Vec<Snapshot> = (0..n)
            .map(|t| {
                let ls = (0..r.random_range(0..4)).map(|_| labels[r.random_range(0..labels.len())].to_string()).collect();
                Snapshot::new(t, CellPose::new(Cell::new(r.random_range(0..9), 0), Heading::E), ls)
            })
            .collect();
        let empty = VisualMemory::new(k);
        let expected = memory_oracle(empty.entries(), &buffer, &keywords, &LexicalScorer, period, k);
        let mem = update_visual_memory(&empty, &buffer, &keywords, &LexicalScorer, period);
        let got: Vec<(usize, String, f64)> =
            mem.entries().iter().map(|e| (e.snapshot.t, e.snapshot.hash.clone(), e.score)).collect();
        ensure(got == expected, || format!("buffer {seed}: {got:?} vs {expected:?}"))?;
    }
    Ok("100 buffers identical to sort-and-truncate; K default 2".into())
}

/// Records what every planning step saw.
#[derive(Default)]
struct Recorder {
    problems: Vec<String>,
    steps: usize,
    images: Vec<usize>,
    graph_payloads: usize,
    proximity_edges: usize,
    /// Frontier ids at each step, sorted by numeric index.
    frontiers: Vec<(usize, Vec<NodeId>)>,
}

impl EpisodeObserver for Recorder {
    fn on_plan(&mut self, t: usize, sg: &SceneGraph, _grid: &OccupancyGrid, input: &PlannerInput) {
        self.steps += 1;
        for p in validate_scene_graph(sg) {
            self.problems.push(format!("t={t}: {p}"));
        }
        let text = serialize_scene_graph(sg);
        if parse_scene_graph(&text).map(|d| d.to_json()).ok().as_deref() != Some(text.as_str()) {
            self.problems.push(format!("t={t}: serialization does not round-trip"));
        }
        self.images.push(input.images.len());
        self.graph_payloads += usize::from(input.scene_graph_json.is_some());
        self.proximity_edges += sg.edges.iter().filter(|e| matches!(e, Edge::Proximity { .. })).count();
        let mut ids: Vec<NodeId> = sg.frontiers.keys().copied().collect();
        ids.sort_by_key(|id| id.index);
        self.frontiers.push((t, ids));
    }
}

fn episode(world: &World, ablation: Ablation, seed: u64) -> Result<(Recorder, ScriptedPlanner, Vec<String>), String> {
    let cfg = EpisodeConfig { ablation, seed, ..Default::default() };
    let truth = OracleTruth::from_world(world).map_err(|e| e.to_string())?;
    let mut planner = ScriptedPlanner::new(truth, ablation, seed);
    let mut rec = Recorder::default();
    let r = run_episode_with(world, &mut planner, &cfg, &EpisodeDeps::default(), &mut rec).map_err(|e| e.to_string())?;
    let actions = r.transcript.iter().map(|s| s.action.clone().unwrap_or_default()).collect();
    Ok((rec, planner, actions))
}

fn c6_graph_invariants() -> Check {
    let mut r = rng(6);
    let mut steps = 0;
    for _ in 0..10 {
        let seed = r.random_range(0..100_000);
        let world = generate_world(seed, &WorldParams::default()).map_err(|e| e.to_string())?;
        let (rec, _, _) = episode(&world, Ablation::None, seed)?;
        ensure(rec.problems.is_empty(), || format!("world {seed}: {:?}", rec.problems))?;
        steps += rec.steps;
    }
    Ok(format!("10 episodes, {steps} planning steps, validator [] and byte-exact round trip at each"))
}

fn output(is_confident: bool, p: f64) -> PlannerOutput {
    PlannerOutput {
        answer_index: 0,
        is_confident,
        confidence_level: p,
        explanation_ans: String::new(),
        explanation_conf: String::new(),
        action: None,
        image_description: String::new(),
        scene_graph_description: String::new(),
    }
}

fn c7_termination() -> Check {
    let cfg = EpisodeConfig::default();
    let table = [
        (output(true, 0.2), 0, Decision::Stop(TerminationReason::Confident)),
        (output(false, 0.91), 0, Decision::Stop(TerminationReason::Threshold)),
        (output(false, 0.90), 0, Decision::Continue),
        (output(false, 0.3), cfg.t_max, Decision::Stop(TerminationReason::MaxSteps)),
    ];
    for (out, t, expected) in &table {
        let got = check_termination(out, *t, &cfg);
        ensure(got == *expected, || format!("p={} t={t}: {got:?} vs {expected:?}", out.confidence_level))?;
    }
    Ok("Confident, 0.91 stops, 0.90 continues, MaxSteps at t=T_max".into())
}

fn history_steps() -> Vec<HistoryEntry> {
    let at = |x: &str, room: &str| format!("The agent is currently at node agent_9 at position [{x}, 0.000] in room {room}");
    let living = at("0.375, 0.375", "room_0 living room");
    let frontier = |f: &str| Some(ActionRef::Frontier { frontier: id(f) });
    vec![
        HistoryEntry::new(0, &living, 0, false, 0.0, frontier("frontier_1")),
        HistoryEntry::new(1, &living, 0, false, 0.125, frontier("frontier_0")),
        HistoryEntry::new(2, &at("0.875, 0.375", "room_1 unknown room"), 2, false, 0.5, frontier("frontier_2")),
        HistoryEntry::new(
            3,
            &at("1.125, 0.625", "room_1 kitchen"),
            0,
            false,
            0.875,
            Some(ActionRef::Object { room: id("room_1"), region: id("region_4"), object: id("object_12") }),
        ),
        HistoryEntry::new(4, &at("1.125, 0.625", "room_1 kitchen"), 1, true, 1.0, None),
    ]
}

fn c8_history() -> Check {
    let golden = core_fixture("history_5_steps.txt");
    let golden = golden.trim_end();
    let mut h = History::new();
    for e in history_steps() {
        let before = h.rendered.clone();
        h = update_history(&h, e);
        ensure(h.rendered.ends_with(&before), || "an update did not keep the old history as suffix".into())?;
    }
    ensure(h.rendered == golden, || format!("rendered history differs:\n{}", h.rendered))?;
    let parsed = parse_history(golden).map_err(|e| e.to_string())?;
    let mut expected = history_steps();
    expected.reverse();
    ensure(parsed == expected, || "parsed entries differ".into())?;
    Ok("golden rendering matches; parse returns 5 entries newest first".into())
}

fn c9_ablations() -> Check {
    let worlds: Vec<(u64, World)> =
        (0..10).map(|s| (s, generate_world(s, &WorldParams::default()).unwrap())).collect();
    let mut picks_checked = 0;
    let mut baseline_edges = 0;
    for (seed, world) in &worlds {
        let (rec, _, _) = episode(world, Ablation::SgOnly, *seed)?;
        ensure(rec.images.iter().all(|&n| n == 0), || format!("sg-only seed {seed}: images {:?}", rec.images))?;

        let (rec, _, _) = episode(world, Ablation::CurrView, *seed)?;
        ensure(rec.images.iter().all(|&n| n == 1), || format!("curr-view seed {seed}: images {:?}", rec.images))?;

        let (rec, _, _) = episode(world, Ablation::NoEnrich, *seed)?;
        ensure(rec.proximity_edges == 0, || format!("no-enrich seed {seed}: proximity edges present"))?;
        baseline_edges += episode(world, Ablation::None, *seed)?.0.proximity_edges;

        let (rec, planner, actions) = episode(world, Ablation::VisOnly, *seed)?;
        ensure(rec.graph_payloads == 0, || format!("vis-only seed {seed}: scene graph sent"))?;
        // replay the seeded draws over the frontiers seen at each frontier step
        let mut replay = ChaCha8Rng::seed_from_u64(*seed);
        let mut expected = Vec::new();
        for ((_, frontiers), action) in rec.frontiers.iter().zip(&actions) {
            if let Some(chosen) = action.strip_prefix("Goto_frontier_node_step(").and_then(|a| a.strip_suffix(')')) {
                let pick = frontiers[replay.random_range(0..frontiers.len())];
                ensure(pick.to_string() == chosen, || format!("vis-only seed {seed}: chose {chosen}, replay {pick}"))?;
                expected.push(pick);
            }
        }
        ensure(planner.random_picks() == expected.as_slice(), || format!("vis-only seed {seed}: pick log differs"))?;
        picks_checked += expected.len();
    }
    ensure(baseline_edges > 0, || "enrichment never produced an edge, so the no-enrich check is vacuous".into())?;
    ensure(picks_checked > 0, || "vis-only never chose a frontier".into())?;
    Ok(format!(
        "10 worlds each: sg-only 0 images, curr-view 1 image, no-enrich 0 proximity edges, vis-only no graph and {picks_checked} random picks replayed"
    ))
}

fn c10_wire() -> Check {
    let sg = two_room_graph();
    let request = core_fixture("wire/request.json");
    let parsed: WireRequest = serde_json::from_str(&request).map_err(|e| e.to_string())?;
    ensure(serde_json::to_string(&parsed).unwrap() == request, || "request does not round-trip".into())?;
    for name in ["response_object.json", "response_frontier.json", "response_confident.json"] {
        let golden = core_fixture(&format!("wire/{name}"));
        let out = validate_planner_output(&golden, &sg, 2).map_err(|e| format!("{name}: {e}"))?;
        ensure(encode_planner_output(&out) == golden, || format!("{name} re-encodes differently"))?;
        let wire: WireResponse = serde_json::from_str(&golden).map_err(|e| e.to_string())?;
        ensure(serde_json::to_string(&wire).unwrap() == golden, || format!("{name} does not round-trip"))?;
    }
    let check = |name: &str| validate_planner_output(&core_fixture(&format!("wire/{name}")), &sg, 2);
    ensure(matches!(check("invalid_schema.json"), Err(PlannerError::SchemaError(_))), || "schema case".into())?;
    ensure(matches!(check("invalid_unknown_node.json"), Err(PlannerError::UnknownNode(_))), || "unknown node case".into())?;
    ensure(
        matches!(check("invalid_hierarchy.json"), Err(PlannerError::HierarchyViolation(_))),
        || "hierarchy case".into(),
    )?;
    Ok("request and 3 responses round-trip; SchemaError, UnknownNode, HierarchyViolation reproduced".into())
}

fn c11_determinism(dir: &Path) -> Check {
    if !dir.join("c1/metrics.csv").is_file() {
        batch(dir, "c1")?;
    }
    batch(dir, "c11")?;
    let a = std::fs::read(dir.join("c1/metrics.csv")).map_err(|e| e.to_string())?;
    let b = std::fs::read(dir.join("c11/metrics.csv")).map_err(|e| e.to_string())?;
    ensure(!a.is_empty() && a == b, || "metrics CSV differs between runs".into())?;
    Ok(format!("metrics CSV identical across runs ({} bytes)", a.len()))
}

fn main() {
    // keep only the harness's own lines; a failing check reports its panic message itself
    std::panic::set_hook(Box::new(|_| {}));
    let tmp = tempfile::tempdir().expect("temp dir");
    let dir = tmp.path();
    let checks: Vec<Named<'_>> = vec![
        ("oracle completeness", Box::new(|| c1_oracle_completeness(dir))),
        ("frontier oracle", Box::new(c2_frontier)),
        ("enrichment oracle", Box::new(c3_enrichment)),
        ("path oracle", Box::new(c4_paths)),
        ("memory oracle", Box::new(c5_memory)),
        ("graph invariants", Box::new(c6_graph_invariants)),
        ("termination table", Box::new(c7_termination)),
        ("history law", Box::new(c8_history)),
        ("ablation behavior", Box::new(c9_ablations)),
        ("wire golden", Box::new(c10_wire)),
        ("determinism", Box::new(|| c11_determinism(dir))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", checks.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
