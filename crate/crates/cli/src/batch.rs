//! Loading worlds and running episodes on a thread pool.

use std::collections::BTreeSet;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use eqa_core::episode::{run_episode, EpisodeConfig, EpisodeResult};
use eqa_core::planner::{OracleTruth, Planner, RemoteConfig, RemotePlanner, ScriptedPlanner};
use eqa_core::worldsim::{generate_world, load_scenario, World, WorldParams};
use rayon::prelude::*;

use crate::config::{PlannerSpec, Source};

pub struct Job {
    pub episode_id: String,
    pub seed: Option<u64>,
    pub world: World,
}

pub fn load_jobs(source: &Source, params: &WorldParams) -> Result<Vec<Job>> {
    match source {
        Source::Seeds(seeds) => seeds
            .iter()
            .map(|&seed| {
                let world = generate_world(seed, params).with_context(|| format!("generating world for seed {seed}"))?;
                Ok(Job { episode_id: format!("seed_{seed:04}"), seed: Some(seed), world })
            })
            .collect(),
        Source::Scenarios(paths) => {
            let mut seen = BTreeSet::new();
            paths
                .iter()
                .map(|path| {
                    let text =
                        std::fs::read_to_string(path).with_context(|| format!("reading scenario {}", path.display()))?;
                    let world = load_scenario(&text).with_context(|| format!("loading scenario {}", path.display()))?;
                    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
                    let episode_id: String =
                        stem.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
                    if !seen.insert(episode_id.clone()) {
                        return Err(anyhow!("two scenarios map to episode id `{episode_id}`"));
                    }
                    Ok(Job { episode_id, seed: None, world })
                })
                .collect()
        }
    }
}

fn planner_for(spec: &PlannerSpec, world: &World, cfg: &EpisodeConfig) -> Result<Box<dyn Planner>> {
    Ok(match spec {
        PlannerSpec::Scripted => {
            let truth = OracleTruth::from_world(world).context("question has no usable keywords")?;
            Box::new(ScriptedPlanner::new(truth, cfg.ablation, cfg.seed))
        }
        PlannerSpec::Remote { endpoint, timeout_s, retries } => Box::new(RemotePlanner::new(RemoteConfig {
            timeout: Duration::from_secs_f64(*timeout_s),
            retries: *retries,
            ..RemoteConfig::new(endpoint.clone())
        })),
    })
}

pub fn run_one(job: &Job, spec: &PlannerSpec, cfg: &EpisodeConfig) -> Result<EpisodeResult> {
    let mut planner = planner_for(spec, &job.world, cfg)?;
    run_episode(&job.world, planner.as_mut(), cfg).with_context(|| format!("episode {}", job.episode_id))
}

/// Runs every job on `threads` workers. Results keep the order of `jobs`.
pub fn run_all(jobs: &[Job], spec: &PlannerSpec, cfg: &EpisodeConfig, threads: usize) -> Result<Vec<EpisodeResult>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    pool.install(|| jobs.par_iter().map(|job| run_one(job, spec, cfg)).collect())
}
