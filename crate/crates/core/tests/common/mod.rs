//! Independent oracles and random instance builders shared by integration
//! tests. Nothing here calls the code it checks.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use eqa_core::enrichment::EnrichmentConfig;
use eqa_core::geom::{Cell, CellPose, Point2};
use eqa_core::mapping::{CellState, FrontierCluster, OccupancyGrid};
use eqa_core::memory::{MemoryEntry, RelevanceScorer, Snapshot};
use eqa_core::scenegraph::{Edge, NodeId, NodeKind, ObjectNode, RegionNode, RoomNode, SceneGraph};
use eqa_core::worldsim::{Camera, Occupancy, World};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Grid with each cell free, occupied or unknown at the given odds.
pub fn random_grid(rng: &mut ChaCha8Rng, w: i32, h: i32, p_free: f64, p_occ: f64) -> OccupancyGrid {
    let mut g = OccupancyGrid::unknown(w, h, 0.25);
    for y in 0..h {
        for x in 0..w {
            let r: f64 = rng.random();
            let s = if r < p_free {
                CellState::Free
            } else if r < p_free + p_occ {
                CellState::Occupied
            } else {
                CellState::Unknown
            };
            g.set(Cell::new(x, y), s);
        }
    }
    g
}

/// Every cell, checked one by one against the frontier definition.
pub fn brute_frontier(g: &OccupancyGrid) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for y in 0..g.height {
        for x in 0..g.width {
            if g.get(Cell::new(x, y)) != CellState::Free {
                continue;
            }
            let unknown_next = [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| {
                let (nx, ny) = (x + dx, y + dy);
                nx >= 0 && ny >= 0 && nx < g.width && ny < g.height && g.get(Cell::new(nx, ny)) == CellState::Unknown
            });
            if unknown_next {
                out.insert(Cell::new(x, y));
            }
        }
    }
    out
}

/// Cell-count distance by breadth-first search over a dense distance table.
pub fn bfs_len(g: &OccupancyGrid, s: Cell, t: Cell) -> Option<usize> {
    let idx = |c: Cell| (c.y * g.width + c.x) as usize;
    let free = |c: Cell| c.x >= 0 && c.y >= 0 && c.x < g.width && c.y < g.height && g.get(c) == CellState::Free;
    if !free(s) || !free(t) {
        return None;
    }
    let mut dist = vec![usize::MAX; (g.width * g.height) as usize];
    dist[idx(s)] = 0;
    let mut q = VecDeque::from([s]);
    while let Some(c) = q.pop_front() {
        if c == t {
            return Some(dist[idx(c)]);
        }
        for (dx, dy) in [(0, -1), (0, 1), (-1, 0), (1, 0)] {
            let n = Cell::new(c.x + dx, c.y + dy);
            if free(n) && dist[idx(n)] == usize::MAX {
                dist[idx(n)] = dist[idx(c)] + 1;
                q.push_back(n);
            }
        }
    }
    None
}

/// Line cells from the closed form: along the major axis step `i`, the minor
/// offset is floor((2 i minor + major) / (2 major)).
pub fn los_closed_form(from: Cell, to: Cell) -> Vec<Cell> {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let (ax, ay) = (dx.abs(), dy.abs());
    let major = ax.max(ay);
    if major == 0 {
        return vec![from];
    }
    let minor = ax.min(ay);
    (0..=major)
        .map(|i| {
            let m = (2 * i * minor + major).div_euclid(2 * major);
            if ax >= ay {
                Cell::new(from.x + i * dx.signum(), from.y + m * dy.signum())
            } else {
                Cell::new(from.x + m * dx.signum(), from.y + i * dy.signum())
            }
        })
        .collect()
}

/// Visible cells by direct enumeration with the closed-form line.
pub fn visible_oracle(world: &World, pose: CellPose, camera: &Camera) -> BTreeSet<Cell> {
    let cs = world.cell_size;
    let mut out = BTreeSet::new();
    for c in world.cells() {
        let (dx, dy) = ((c.x - pose.cell.x) as f64, (c.y - pose.cell.y) as f64);
        if c == pose.cell {
            out.insert(c);
            continue;
        }
        if (dx * dx + dy * dy) * cs * cs > camera.max_range_m * camera.max_range_m + 1e-9 {
            continue;
        }
        let bearing = dy.atan2(dx).to_degrees();
        let heading = pose.heading.index() as f64 * 45.0;
        let off = (bearing - heading + 540.0).rem_euclid(360.0) - 180.0;
        if off.abs() > camera.fov_deg / 2.0 + 1e-6 {
            continue;
        }
        let line = los_closed_form(pose.cell, c);
        if line[1..line.len() - 1].iter().all(|m| world.occupancy(*m) == Occupancy::Free) {
            out.insert(c);
        }
    }
    out
}

/// Proximity edges expected for each frontier: brute force over all objects,
/// repeatedly extracting the nearest remaining one within `d`, smaller id
/// first on equal distance.
pub fn knn_oracle(objects: &[(NodeId, Point2)], centroid: Point2, cfg: &EnrichmentConfig) -> BTreeSet<NodeId> {
    let mut left: Vec<(NodeId, f64)> = objects
        .iter()
        .map(|(id, p)| (*id, ((p.x - centroid.x).powi(2) + (p.y - centroid.y).powi(2)).sqrt()))
        .filter(|(_, dist)| *dist <= cfg.d)
        .collect();
    let mut picked = BTreeSet::new();
    while picked.len() < cfg.j && !left.is_empty() {
        let mut best = 0;
        for i in 1..left.len() {
            let (id, dist) = left[i];
            let (bid, bdist) = left[best];
            if dist < bdist || (dist == bdist && id < bid) {
                best = i;
            }
        }
        picked.insert(left.remove(best).0);
    }
    picked
}

/// A graph of one room with one region over a `w x h` block, random objects
/// and random frontier clusters.
pub struct EnrichCase {
    pub sg: SceneGraph,
    pub clusters: Vec<FrontierCluster>,
    pub objects: Vec<(NodeId, Point2)>,
    pub cfg: EnrichmentConfig,
}

pub fn random_enrich_case(rng: &mut ChaCha8Rng) -> EnrichCase {
    let (w, h) = (rng.random_range(4..16), rng.random_range(4..16));
    let cs = 0.25;
    let mut sg = SceneGraph::new();
    let room = NodeId::new(NodeKind::Room, 0);
    let region = NodeId::new(NodeKind::Region, 0);
    sg.rooms.insert(room, RoomNode { id: room, name: "office".into() });
    let cells: Vec<Cell> = (0..h).flat_map(|y| (0..w).map(move |x| Cell::new(x, y))).collect();
    let mut sorted = cells.clone();
    sorted.sort();
    sg.regions.insert(region, RegionNode { id: region, cells: sorted });
    sg.edges.insert(Edge::Belonging { child: room, parent: sg.building });
    sg.edges.insert(Edge::Belonging { child: region, parent: room });

    let n_obj = rng.random_range(0..12);
    let mut objects = Vec::new();
    for i in 0..n_obj {
        let id = NodeId::new(NodeKind::Object, i);
        let cell = Cell::new(rng.random_range(0..w), rng.random_range(0..h));
        let position = Point2::new((cell.x as f64 + 0.5) * cs, (cell.y as f64 + 0.5) * cs);
        sg.objects.insert(id, ObjectNode { id, label: format!("thing{}", i % 4), cell, position });
        sg.edges.insert(Edge::Belonging { child: id, parent: region });
        objects.push((id, position));
    }

    let n_fr = rng.random_range(1..5);
    let clusters = (0..n_fr)
        .map(|i| {
            let c = Cell::new(rng.random_range(0..w), rng.random_range(0..h));
            let mut members = vec![c];
            if rng.random_bool(0.5) && c.x + 1 < w {
                members.push(Cell::new(c.x + 1, c.y));
            }
            let n = members.len() as f64;
            let centroid = Point2::new(
                members.iter().map(|m| (m.x as f64 + 0.5) * cs).sum::<f64>() / n,
                members.iter().map(|m| (m.y as f64 + 0.5) * cs).sum::<f64>() / n,
            );
            FrontierCluster { id: format!("frontier_{i}"), cells: members, centroid }
        })
        .collect();

    let cfg = EnrichmentConfig { j: rng.random_range(0..5), d: rng.random_range(0.0..3.0) };
    EnrichCase { sg, clusters, objects, cfg }
}

/// Thin, score, merge, sort everything, truncate.
pub fn memory_oracle(
    held: &[MemoryEntry],
    buffer: &[Snapshot],
    keywords: &BTreeSet<String>,
    scorer: &dyn RelevanceScorer,
    period: usize,
    k: usize,
) -> Vec<(usize, String, f64)> {
    let mut pool: Vec<&Snapshot> = held.iter().map(|e| &e.snapshot).collect();
    for (i, s) in buffer.iter().enumerate() {
        if s.t % period.max(1) == 0 || i + 1 == buffer.len() {
            pool.push(s);
        }
    }
    let mut scored: Vec<(usize, String, f64)> =
        pool.into_iter().map(|s| (s.t, s.hash.clone(), scorer.score(keywords, s))).collect();
    scored.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored
}

/// Group ids by their set of proximity neighbours.
pub fn proximity_map(sg: &SceneGraph) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
    let mut m: BTreeMap<NodeId, BTreeSet<NodeId>> = sg.frontiers.keys().map(|f| (*f, BTreeSet::new())).collect();
    for e in &sg.edges {
        if let Edge::Proximity { frontier, object } = e {
            m.entry(*frontier).or_default().insert(*object);
        }
    }
    m
}

pub fn id(s: &str) -> NodeId {
    s.parse().unwrap()
}

/// Two rooms: room_0 (living room) holds region_0 with object_0 (couch) and
/// the agent; room_1 (kitchen) holds region_1 with object_1 (stove) and
/// frontier_0, which is linked to the stove.
pub fn two_room_graph() -> SceneGraph {
    use eqa_core::geom::Heading;
    use eqa_core::scenegraph::{AgentNode, FrontierNode};
    let mut sg = SceneGraph::new();
    sg.rooms.insert(id("room_0"), RoomNode { id: id("room_0"), name: "living room".into() });
    sg.rooms.insert(id("room_1"), RoomNode { id: id("room_1"), name: "kitchen".into() });
    sg.regions.insert(id("region_0"), RegionNode { id: id("region_0"), cells: vec![Cell::new(1, 1), Cell::new(2, 1)] });
    sg.regions.insert(id("region_1"), RegionNode { id: id("region_1"), cells: vec![Cell::new(3, 1), Cell::new(4, 1)] });
    sg.objects.insert(
        id("object_0"),
        ObjectNode { id: id("object_0"), label: "couch".into(), cell: Cell::new(2, 1), position: Point2::new(0.625, 0.375) },
    );
    sg.objects.insert(
        id("object_1"),
        ObjectNode { id: id("object_1"), label: "stove".into(), cell: Cell::new(4, 1), position: Point2::new(1.125, 0.375) },
    );
    sg.frontiers.insert(
        id("frontier_0"),
        FrontierNode { id: id("frontier_0"), centroid: Point2::new(1.125, 0.875), cells: vec![Cell::new(4, 1)] },
    );
    sg.agent = Some(AgentNode { id: id("agent_3"), cell: Cell::new(1, 1), position: Point2::new(0.375, 0.375), heading: Heading::E });
    let b = sg.building;
    for (c, p) in [
        ("room_0", b),
        ("room_1", b),
        ("region_0", id("room_0")),
        ("region_1", id("room_1")),
        ("frontier_0", id("room_1")),
        ("object_0", id("region_0")),
        ("object_1", id("region_1")),
        ("agent_3", id("region_0")),
    ] {
        sg.edges.insert(Edge::Belonging { child: id(c), parent: p });
    }
    sg.edges.insert(Edge::traversability(id("region_0"), id("region_1")));
    sg.edges.insert(Edge::traversability(id("room_0"), id("room_1")));
    sg.edges.insert(Edge::Proximity { frontier: id("frontier_0"), object: id("object_1") });
    sg
}

pub fn fixture(name: &str) -> String {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
