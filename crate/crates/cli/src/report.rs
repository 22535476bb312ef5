//! `eqa report`: one summary row per finished run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use eqa_core::episode::Metrics;
use serde::Serialize;

use crate::output::read_metrics;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub run: String,
    pub planner: String,
    pub ablation: String,
    pub n: usize,
    pub success_rate_pct: f64,
    pub avg_steps: Option<f64>,
    pub avg_l_tau_m: Option<f64>,
}

/// Accepts a run directory or a metrics CSV. Planner and ablation come from
/// the `manifest.json` next to the CSV when there is one.
pub fn summarize_input(input: &Path) -> Result<ReportRow> {
    let csv_path: PathBuf = if input.is_dir() { input.join("metrics.csv") } else { input.to_path_buf() };
    let rows = read_metrics(&csv_path)?;
    let metrics = Metrics::from_outcomes(rows.iter().map(|r| (r.success, r.planning_steps, r.traj_len_m)));
    let dir = csv_path.parent().unwrap_or(Path::new("."));
    let manifest_path = dir.join("manifest.json");
    let (mut planner, mut ablation) = ("-".to_string(), "-".to_string());
    if manifest_path.is_file() {
        let text = std::fs::read_to_string(&manifest_path)?;
        let m: serde_json::Value =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", manifest_path.display()))?;
        if let Some(p) = m["planner"].as_str() {
            planner = p.to_string();
        }
        if let Some(a) = m["episode"]["ablation"].as_str() {
            ablation = a.to_string();
        }
    }
    let run = if input.is_dir() { input } else { dir };
    Ok(ReportRow {
        run: run.display().to_string(),
        planner,
        ablation,
        n: metrics.n,
        success_rate_pct: metrics.success_rate_pct,
        avg_steps: metrics.avg_planning_steps_success,
        avg_l_tau_m: metrics.avg_traj_len_success_m,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

pub fn render_table(rows: &[ReportRow]) -> String {
    let width = rows.iter().map(|r| r.run.len()).max().unwrap_or(0).max(3);
    let mut s = format!(
        "{:<width$}  {:<8}  {:<9}  {:>4}  {:>9}  {:>9}  {:>10}\n",
        "run", "planner", "ablation", "n", "success%", "avg_steps", "avg_L_tau"
    );
    for r in rows {
        let _ = writeln!(
            s,
            "{:<width$}  {:<8}  {:<9}  {:>4}  {:>9.1}  {:>9}  {:>10}",
            r.run,
            r.planner,
            r.ablation,
            r.n,
            r.success_rate_pct,
            opt(r.avg_steps),
            opt(r.avg_l_tau_m)
        );
    }
    s
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
