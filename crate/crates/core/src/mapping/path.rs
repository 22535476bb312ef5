use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use super::{MappingError, OccupancyGrid};
use crate::geom::{Cell, Point2};

/// Minimal 4-connected path over free cells, both ends included.
///
/// A* with the Manhattan heuristic; it is admissible and consistent on a
/// unit-cost 4-grid, so the first expansion of `goal` is optimal.
pub fn shortest_path(grid: &OccupancyGrid, start: Cell, goal: Cell) -> Result<Vec<Cell>, MappingError> {
    let unreachable = MappingError::Unreachable { from: start, to: goal };
    if !grid.is_free(start) || !grid.is_free(goal) {
        return Err(unreachable);
    }
    if start == goal {
        return Ok(vec![start]);
    }
    let h = |c: Cell| ((c.x - goal.x).abs() + (c.y - goal.y).abs()) as u32;

    let mut g: HashMap<Cell, u32> = HashMap::from([(start, 0)]);
    let mut parent: HashMap<Cell, Cell> = HashMap::new();
    // (f, h, cell) min-heap: prefer lower f, then closer to goal, then cell order
    let mut open = BinaryHeap::from([Reverse((h(start), h(start), start))]);
    while let Some(Reverse((_, _, cur))) = open.pop() {
        if cur == goal {
            let mut path = vec![goal];
            let mut c = goal;
            while let Some(&p) = parent.get(&c) {
                path.push(p);
                c = p;
            }
            path.reverse();
            return Ok(path);
        }
        let gc = g[&cur];
        for n in cur.neighbors4() {
            if !grid.is_free(n) {
                continue;
            }
            let cand = gc + 1;
            if g.get(&n).is_none_or(|&old| cand < old) {
                g.insert(n, cand);
                parent.insert(n, cur);
                open.push(Reverse((cand + h(n), h(n), n)));
            }
        }
    }
    Err(unreachable)
}

/// Free cells 4-connected to `start`, in breadth-first order.
pub fn reachable_from(grid: &OccupancyGrid, start: Cell) -> Vec<Cell> {
    if !grid.is_free(start) {
        return Vec::new();
    }
    let mut seen = std::collections::HashSet::from([start]);
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(c) = queue.pop_front() {
        for n in c.neighbors4() {
            if grid.is_free(n) && seen.insert(n) {
                order.push(n);
                queue.push_back(n);
            }
        }
    }
    order
}

/// The free cell reachable from `from` whose center is nearest to `target`;
/// ties go to the smaller cell.
pub fn nearest_reachable_free_cell(grid: &OccupancyGrid, from: Cell, target: Point2) -> Option<Cell> {
    reachable_from(grid, from).into_iter().min_by(|a, b| {
        a.center(grid.cell_size)
            .distance_sq(target)
            .total_cmp(&b.center(grid.cell_size).distance_sq(target))
            .then(a.cmp(b))
    })
}
