use std::collections::BTreeMap;

use super::{Edge, NodeId, NodeKind, SceneGraph};

const LENGTH_EPS: f64 = 1e-9;

/// Lists every broken structural rule; empty iff the graph is well formed.
pub fn validate_scene_graph(sg: &SceneGraph) -> Vec<String> {
    let mut out = Vec::new();

    let mut belongs: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for edge in &sg.edges {
        match *edge {
            Edge::Belonging { child, parent } => {
                for n in [child, parent] {
                    if !sg.contains(n) {
                        out.push(format!("belonging edge {child} -> {parent} references missing node {n}"));
                    }
                }
                belongs.entry(child).or_default().push(parent);
            }
            Edge::Traversability { a, b } => {
                for n in [a, b] {
                    if !sg.contains(n) {
                        out.push(format!("traversability edge {a} -- {b} references missing node {n}"));
                    }
                }
                if a.level() != b.level() {
                    out.push(format!("traversability edge {a} -- {b} crosses levels"));
                }
            }
            Edge::Proximity { frontier, object } => {
                if frontier.kind != NodeKind::Frontier || object.kind != NodeKind::Object {
                    out.push(format!("proximity edge {frontier} -- {object} must join a frontier to an object"));
                    continue;
                }
                match (sg.frontiers.get(&frontier), sg.objects.get(&object)) {
                    (Some(f), Some(o)) => {
                        let len = f.centroid.distance(o.position);
                        if len > sg.proximity_radius_m + LENGTH_EPS {
                            out.push(format!(
                                "proximity edge {frontier} -- {object} spans {len:.3} m > {:.3} m",
                                sg.proximity_radius_m
                            ));
                        }
                    }
                    _ => out.push(format!("proximity edge {frontier} -- {object} references a missing node")),
                }
            }
        }
    }

    let mut expect_parent = |child: NodeId, parent_kind: NodeKind| {
        let parents = belongs.get(&child).map(Vec::as_slice).unwrap_or(&[]);
        match parents {
            [p] if p.kind == parent_kind => {}
            [] => out.push(format!("{child} has no belonging edge to a {parent_kind:?}")),
            [p] => out.push(format!("{child} belongs to {p}, expected a {parent_kind:?}")),
            many => out.push(format!("{child} has {} belonging edges", many.len())),
        }
    };
    for id in sg.rooms.keys() {
        expect_parent(*id, NodeKind::Building);
    }
    for id in sg.regions.keys().chain(sg.frontiers.keys()) {
        expect_parent(*id, NodeKind::Room);
    }
    for id in sg.objects.keys() {
        expect_parent(*id, NodeKind::Region);
    }
    if let Some(agent) = &sg.agent {
        expect_parent(agent.id, NodeKind::Region);
    }
    if belongs.contains_key(&sg.building) {
        out.push(format!("{} must not belong to anything", sg.building));
    }
    out
}
