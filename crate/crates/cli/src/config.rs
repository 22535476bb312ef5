//! Run configuration: TOML file values overlaid by command-line flags.

use std::path::{Path, PathBuf};

use eqa_core::episode::EpisodeConfig;
use eqa_core::worldsim::WorldParams;
use serde::Deserialize;

use crate::Failure;

/// Parses seed specs such as `7`, `0..24` (inclusive), `0..=24` or `1,4,9..12`.
pub fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in spec.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(format!("empty item in seed list `{spec}`"));
        }
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| format!("bad seed `{s}` in `{spec}`"));
        if let Some((a, b)) = part.split_once("..") {
            let (lo, hi) = (num(a)?, num(b.strip_prefix('=').unwrap_or(b))?);
            if lo > hi {
                return Err(format!("empty seed range `{part}`"));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(num(part)?);
        }
    }
    Ok(seeds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    #[default]
    Scripted,
    Remote,
}

impl PlannerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PlannerKind::Scripted => "scripted",
            PlannerKind::Remote => "remote",
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub planner: Option<PlannerKind>,
    pub endpoint: Option<String>,
    pub timeout_s: Option<f64>,
    pub retries: Option<usize>,
    pub seeds: Option<String>,
    /// Relative paths are taken from the config file's directory.
    pub scenarios: Option<Vec<PathBuf>>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub episode: Option<EpisodeConfig>,
    pub world: Option<WorldParams>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig =
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("bad config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let Some(list) = &mut cfg.scenarios {
            for p in list.iter_mut() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Seeds(Vec<u64>),
    Scenarios(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlannerSpec {
    Scripted,
    Remote { endpoint: String, timeout_s: f64, retries: usize },
}

/// Fully resolved run request.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub source: Source,
    pub world: WorldParams,
    pub planner: PlannerSpec,
    pub episode: EpisodeConfig,
    pub out: PathBuf,
    pub jobs: usize,
}
