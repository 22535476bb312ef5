//! Files written by `eqa run`: metrics CSV, transcripts, SVG plots and the manifest.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use eqa_core::episode::{EpisodeConfig, EpisodeResult, Metrics};
use eqa_core::geom::Point2;
use eqa_core::worldsim::{World, WorldParams};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub episode_id: String,
    pub seed: Option<u64>,
    pub success: bool,
    pub planning_steps: usize,
    pub traj_len_m: f64,
    /// Chosen answer index; empty when the episode ended without one.
    pub answer: Option<usize>,
    pub correct: bool,
    pub termination_reason: String,
}

impl MetricsRow {
    pub fn new(episode_id: &str, seed: Option<u64>, r: &EpisodeResult) -> Self {
        Self {
            episode_id: episode_id.to_string(),
            seed,
            success: r.success,
            planning_steps: r.planning_steps,
            traj_len_m: r.trajectory_length_m,
            answer: r.answer_index,
            correct: r.correct(),
            termination_reason: r.termination_reason.as_str().to_string(),
        }
    }
}

pub fn write_metrics(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize().collect::<Result<_, _>>().with_context(|| format!("parsing {}", path.display()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEpisode {
    pub episode_id: String,
    pub seed: Option<u64>,
    pub transcript: String,
    pub svg: String,
}

/// Everything needed to repeat a run. Contains no timestamps or thread counts,
/// so repeating a run reproduces it byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub planner: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timeout_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<String>>,
    pub world: WorldParams,
    pub episode: EpisodeConfig,
    pub summary: Metrics,
    pub episodes: Vec<ManifestEpisode>,
}

const PX: f64 = 20.0;

fn px(p: Point2, cell_size: f64) -> (f64, f64) {
    (p.x / cell_size * PX, p.y / cell_size * PX)
}

/// Top-down plot: walls, objects (question targets in blue), the agent's
/// path from the green start to the black end, and the last frontier centroids.
pub fn render_svg(episode_id: &str, world: &World, r: &EpisodeResult) -> String {
    let cs = world.cell_size;
    let (w, h) = (world.width as f64 * PX, world.height as f64 * PX);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(
        s,
        "<title>{episode_id}: {} after {} steps, {:.2} m</title>",
        r.termination_reason.as_str(),
        r.planning_steps,
        r.trajectory_length_m
    );
    let _ = writeln!(s, r##"<rect width="{w}" height="{h}" fill="#ffffff"/>"##);
    for c in world.cells().filter(|c| !world.is_free(*c)) {
        let _ = writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{PX}" height="{PX}" fill="#404040"/>"##,
            c.x as f64 * PX,
            c.y as f64 * PX
        );
    }
    for o in &world.objects {
        let target = world.question.target_object_ids.contains(&o.id);
        let (x, y) = px(o.cell.center(cs), cs);
        let fill = if target { "#1f5fd6" } else { "#a0a0a0" };
        let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="{}" fill="{fill}"><title>{}</title></circle>"#, PX * 0.3, o.label);
    }
    let mut points: Vec<(f64, f64)> = Vec::new();
    for pose in &r.path {
        let p = px(pose.cell.center(cs), cs);
        if points.last() != Some(&p) {
            points.push(p);
        }
    }
    if points.len() > 1 {
        let list: Vec<String> = points.iter().map(|(x, y)| format!("{x},{y}")).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#d03030" stroke-width="{}"/>"##,
            list.join(" "),
            PX * 0.15
        );
    }
    if let (Some(first), Some(last)) = (points.first(), points.last()) {
        let _ = writeln!(s, r##"<circle cx="{}" cy="{}" r="{}" fill="#20a040"/>"##, first.0, first.1, PX * 0.35);
        let _ = writeln!(s, r##"<circle cx="{}" cy="{}" r="{}" fill="#000000"/>"##, last.0, last.1, PX * 0.25);
    }
    for f in &r.final_frontiers {
        let (x, y) = px(*f, cs);
        let _ = writeln!(
            s,
            r##"<circle cx="{x}" cy="{y}" r="{}" fill="none" stroke="#f08000" stroke-width="2"/>"##,
            PX * 0.4
        );
    }
    s.push_str("</svg>\n");
    s
}
