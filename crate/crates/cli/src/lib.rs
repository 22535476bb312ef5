//! The `eqa` command line: generate worlds, run batches of episodes, summarize runs.
//!
//! Exit codes: 0 on success, 2 on usage errors (bad flags, bad config,
//! contradictory settings), 1 when something fails while running.

pub mod batch;
pub mod config;
pub mod output;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use anyhow::Context;
use clap::{CommandFactory, Parser, Subcommand};
use eqa_core::episode::{compute_metrics, EpisodeConfig};
use eqa_core::planner::Ablation;
use eqa_core::worldsim::{generate_world, save_scenario, WorldParams};

use config::{parse_seeds, FileConfig, PlannerKind, PlannerSpec, RunManifest, Source};
use output::{render_svg, write_metrics, Manifest, ManifestEpisode, MetricsRow};

pub enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "eqa", version, about = "Offline embodied question answering over synthetic grid worlds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write generated worlds as scenario files.
    Generate(GenerateArgs),
    /// Run one episode per world and write metrics, transcripts and plots.
    Run(RunArgs),
    /// Summarize finished runs.
    Report(ReportArgs),
}

#[derive(Debug, clap::Args)]
struct GenerateArgs {
    /// Seeds, e.g. `0..24` (inclusive) or `1,5,9`.
    #[arg(long)]
    seeds: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    width: Option<i32>,
    #[arg(long)]
    height: Option<i32>,
    #[arg(long)]
    cell_size: Option<f64>,
    #[arg(long)]
    rooms: Option<usize>,
    #[arg(long)]
    min_room_cells: Option<usize>,
    #[arg(long)]
    objects: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// TOML file with defaults for any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario file; repeat for several.
    #[arg(long = "scenario")]
    scenarios: Vec<PathBuf>,
    /// Generate worlds from these seeds, e.g. `0..24` (inclusive).
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_enum)]
    planner: Option<PlannerKind>,
    /// URL of the remote planner.
    #[arg(long)]
    endpoint: Option<String>,
    /// Per-request timeout of the remote planner, in seconds.
    #[arg(long)]
    timeout_s: Option<f64>,
    /// Extra attempts after a failed remote request.
    #[arg(long)]
    retries: Option<usize>,
    /// Visual memory capacity.
    #[arg(long)]
    k: Option<usize>,
    /// Objects linked to each frontier.
    #[arg(long)]
    j: Option<usize>,
    /// Frontier-object link radius in metres.
    #[arg(long)]
    d: Option<f64>,
    /// Last step index before a forced stop.
    #[arg(long)]
    tmax: Option<usize>,
    #[arg(long)]
    conf_threshold: Option<f64>,
    #[arg(long)]
    sampling_period: Option<usize>,
    #[arg(long)]
    min_cluster_size: Option<usize>,
    #[arg(long)]
    reprompts: Option<usize>,
    /// none, sg-only, vis-only, no-enrich or curr-view.
    #[arg(long)]
    ablation: Option<Ablation>,
    /// Seed of the scripted planner's random choices.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, clap::Args)]
struct ReportArgs {
    /// Run directories or metrics CSV files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return 2;
        }
    };
    let (name, result) = match cli.command {
        Command::Generate(a) => ("generate", generate(a)),
        Command::Run(a) => ("run", run(a)),
        Command::Report(a) => ("report", report_cmd(a)),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let mut cmd = Cli::command();
            cmd.build();
            let usage = cmd.find_subcommand_mut(name).map(|c| c.render_usage().to_string()).unwrap_or_default();
            eprintln!("error: {msg}\n\n{usage}\n\nFor more information, try 'eqa {name} --help'.");
            2
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let seeds = parse_seeds(&a.seeds).map_err(Failure::Usage)?;
    let d = WorldParams::default();
    let params = WorldParams {
        width: a.width.unwrap_or(d.width),
        height: a.height.unwrap_or(d.height),
        cell_size: a.cell_size.unwrap_or(d.cell_size),
        n_rooms: a.rooms.unwrap_or(d.n_rooms),
        min_room_cells: a.min_room_cells.unwrap_or(d.min_room_cells),
        n_objects: a.objects.unwrap_or(d.n_objects),
        ..d
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for seed in seeds {
        let world = generate_world(seed, &params).with_context(|| format!("generating world for seed {seed}"))?;
        let path = a.out.join(format!("world_{seed:04}.toml"));
        std::fs::write(&path, save_scenario(&world)).with_context(|| format!("writing {}", path.display()))?;
        println!("{}", path.display());
    }
    Ok(())
}

/// Merges flags over the config file and checks the result.
fn resolve(a: RunArgs) -> Result<RunManifest, Failure> {
    let file = match &a.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flag_source = match (a.seeds, a.scenarios.is_empty()) {
        (Some(_), false) => return usage("--seeds and --scenario are mutually exclusive"),
        (Some(s), true) => Some(Source::Seeds(parse_seeds(&s).map_err(Failure::Usage)?)),
        (None, false) => Some(Source::Scenarios(a.scenarios)),
        (None, true) => None,
    };
    let source = match (flag_source, file.seeds, file.scenarios) {
        (Some(s), _, _) => s,
        (None, Some(_), Some(_)) => return usage("config sets both seeds and scenarios"),
        (None, Some(s), None) => Source::Seeds(parse_seeds(&s).map_err(Failure::Usage)?),
        (None, None, Some(list)) => Source::Scenarios(list),
        (None, None, None) => return usage("no worlds given; pass --seeds or --scenario"),
    };

    let kind = a.planner.or(file.planner).unwrap_or_default();
    let endpoint = a.endpoint.or(file.endpoint);
    let timeout_s = a.timeout_s.or(file.timeout_s).unwrap_or(60.0);
    let retries = a.retries.or(file.retries).unwrap_or(2);
    let planner = match (kind, endpoint) {
        (PlannerKind::Scripted, None) => PlannerSpec::Scripted,
        (PlannerKind::Scripted, Some(_)) => return usage("--endpoint only applies to --planner remote"),
        (PlannerKind::Remote, None) => return usage("--planner remote needs --endpoint"),
        (PlannerKind::Remote, Some(endpoint)) => {
            if !(timeout_s.is_finite() && timeout_s > 0.0) {
                return usage("--timeout-s must be positive");
            }
            PlannerSpec::Remote { endpoint, timeout_s, retries }
        }
    };

    let mut episode: EpisodeConfig = file.episode.unwrap_or_default();
    macro_rules! overlay {
        ($($flag:ident => $field:ident),*) => { $(if let Some(v) = a.$flag { episode.$field = v; })* };
    }
    overlay!(k => k, j => j, d => d, tmax => t_max, conf_threshold => conf_threshold,
        sampling_period => sampling_period, min_cluster_size => min_cluster_size,
        reprompts => reprompts, ablation => ablation, seed => seed);
    episode.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let Some(out) = a.out.or(file.out) else { return usage("no output directory; pass --out") };
    let jobs = a
        .jobs
        .or(file.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if jobs == 0 {
        return usage("--jobs must be at least 1");
    }
    Ok(RunManifest { source, world: file.world.unwrap_or_default(), planner, episode, out, jobs })
}

fn run(a: RunArgs) -> Result<(), Failure> {
    let m = resolve(a)?;
    let jobs = batch::load_jobs(&m.source, &m.world)?;
    let results = batch::run_all(&jobs, &m.planner, &m.episode, m.jobs)?;

    let out = &m.out;
    for sub in ["transcripts", "svg"] {
        std::fs::create_dir_all(out.join(sub)).with_context(|| format!("creating {}", out.join(sub).display()))?;
    }
    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for (job, r) in jobs.iter().zip(&results) {
        let transcript = format!("transcripts/{}.jsonl", job.episode_id);
        let svg = format!("svg/{}.svg", job.episode_id);
        std::fs::write(out.join(&transcript), r.transcript_jsonl()).context("writing transcript")?;
        std::fs::write(out.join(&svg), render_svg(&job.episode_id, &job.world, r)).context("writing plot")?;
        rows.push(MetricsRow::new(&job.episode_id, job.seed, r));
        episodes.push(ManifestEpisode { episode_id: job.episode_id.clone(), seed: job.seed, transcript, svg });
    }
    write_metrics(&out.join("metrics.csv"), &rows)?;

    let summary = compute_metrics(&results);
    let (planner, endpoint, timeout_s, retries) = match &m.planner {
        PlannerSpec::Scripted => ("scripted", None, None, None),
        PlannerSpec::Remote { endpoint, timeout_s, retries } => {
            ("remote", Some(endpoint.clone()), Some(*timeout_s), Some(*retries))
        }
    };
    let (seeds, scenarios) = match &m.source {
        Source::Seeds(s) => (Some(s.clone()), None),
        Source::Scenarios(p) => (None, Some(p.iter().map(|p| p.display().to_string()).collect())),
    };
    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        planner: planner.to_string(),
        endpoint,
        timeout_s,
        retries,
        seeds,
        scenarios,
        world: m.world.clone(),
        episode: m.episode.clone(),
        summary: summary.clone(),
        episodes,
    };
    let text = serde_json::to_string_pretty(&manifest).context("encoding manifest")? + "\n";
    std::fs::write(out.join("manifest.json"), text).context("writing manifest")?;

    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"));
    println!(
        "{} episodes ({planner}, {}): success {:.1}%, avg steps {}, avg L_tau {} m -> {}",
        summary.n,
        m.episode.ablation,
        summary.success_rate_pct,
        fmt(summary.avg_planning_steps_success),
        fmt(summary.avg_traj_len_success_m),
        out.display()
    );
    Ok(())
}

fn report_cmd(a: ReportArgs) -> Result<(), Failure> {
    let rows = a.inputs.iter().map(|p| report::summarize_input(p)).collect::<anyhow::Result<Vec<_>>>()?;
    print!("{}", report::render_table(&rows));
    if let Some(path) = &a.out {
        report::write_report_csv(path, &rows)?;
    }
    Ok(())
}
