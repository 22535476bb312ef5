use std::collections::{BTreeSet, VecDeque};

use super::{CellState, OccupancyGrid};
use crate::geom::{Cell, Point2};

pub const DEFAULT_MIN_CLUSTER_SIZE: usize = 2;

/// Centroids closer than this keep their previous frontier id.
const ID_MATCH_RADIUS_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierCluster {
    pub id: String,
    /// Sorted, non-empty.
    pub cells: Vec<Cell>,
    pub centroid: Point2,
}

/// Free cells with at least one unknown 4-neighbor.
pub fn detect_frontier_cells(grid: &OccupancyGrid) -> BTreeSet<Cell> {
    // walk from the unknown side: every free neighbor of an unknown cell
    let mut out = BTreeSet::new();
    for c in grid.cells() {
        if grid.get(c) != CellState::Unknown {
            continue;
        }
        for n in c.neighbors4() {
            if grid.in_bounds(n) && grid.is_free(n) {
                out.insert(n);
            }
        }
    }
    out
}

/// 8-connected components of `cells` with at least `min_cluster_size`
/// members, ordered by their smallest cell. Ids are provisional
/// (`frontier_<i>` in output order); see [`FrontierTracker`] for stable ids.
pub fn cluster_frontiers(cells: &BTreeSet<Cell>, min_cluster_size: usize, cell_size: f64) -> Vec<FrontierCluster> {
    let mut seen = BTreeSet::new();
    let mut clusters = Vec::new();
    // BTreeSet iteration visits each component first at its smallest cell
    for &start in cells {
        if !seen.insert(start) {
            continue;
        }
        let mut members = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors8() {
                if cells.contains(&n) && seen.insert(n) {
                    members.push(n);
                    queue.push_back(n);
                }
            }
        }
        if members.len() < min_cluster_size.max(1) {
            continue;
        }
        members.sort();
        let centroid = mean_center(&members, cell_size);
        clusters.push(FrontierCluster {
            id: format!("frontier_{}", clusters.len()),
            cells: members,
            centroid,
        });
    }
    clusters
}

fn mean_center(cells: &[Cell], cell_size: f64) -> Point2 {
    let n = cells.len() as f64;
    let (sx, sy) = cells.iter().fold((0.0, 0.0), |(sx, sy), c| {
        let p = c.center(cell_size);
        (sx + p.x, sy + p.y)
    });
    Point2::new(sx / n, sy / n)
}

/// Keeps frontier ids stable across map updates by matching each new
/// centroid to the nearest previous one within 1 m.
#[derive(Debug, Clone, Default)]
pub struct FrontierTracker {
    next_id: usize,
    previous: Vec<(usize, Point2)>,
}

impl FrontierTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn assign(&mut self, clusters: Vec<FrontierCluster>) -> Vec<FrontierCluster> {
        let mut unmatched = self.previous.clone();
        let mut current = Vec::with_capacity(clusters.len());
        let mut out = Vec::with_capacity(clusters.len());
        for mut cluster in clusters {
            let best = unmatched
                .iter()
                .enumerate()
                .map(|(i, (id, p))| (i, *id, p.distance(cluster.centroid)))
                .filter(|(_, _, d)| *d <= ID_MATCH_RADIUS_M)
                .min_by(|a, b| a.2.total_cmp(&b.2).then(a.1.cmp(&b.1)));
            let id = match best {
                Some((i, id, _)) => {
                    unmatched.swap_remove(i);
                    id
                }
                None => {
                    self.next_id += 1;
                    self.next_id - 1
                }
            };
            cluster.id = format!("frontier_{id}");
            current.push((id, cluster.centroid));
            out.push(cluster);
        }
        self.previous = current;
        out
    }
}
