//! Command-line front end: `train`, `bench`, `report`, `replay`.
//!
//! Settings resolve as flag > `--config` file > `AFC_OUT_DIR` (output root only) > built-in
//! default. Every command writes the effective configuration and a timestamped `run.log` into
//! its output directory; all other outputs are reproducible for fixed seeds.

use std::ffi::OsString;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};

use crate::bench::{
    emit_report, grid, read_breakdown_csv, read_records_csv, render_strategy_markdown, run_sweep, Reference,
    ReportFormat, ScalingTable, SweepSpec,
};
use crate::config::RunConfig;
use crate::coupling::{run_mock_solver, IoMode, Launcher, MockSolverOptions};
use crate::error::{Error, Result};
use crate::orchestrator::{
    read_history, render_history_svg, run_training_with, summarize, ExecutionMode, SolverBackend, TrainingOptions,
};
use crate::ppo::{load_checkpoint, save_checkpoint};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Episodes averaged in the training summary.
const SUMMARY_WINDOW: usize = 10;

#[derive(Debug, Parser)]
#[command(
    name = "afc",
    version,
    about = "Hybrid-parallel PPO training for active flow control"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a policy and write history, checkpoints and a drag summary.
    Train(TrainArgs),
    /// Run a scaling sweep over a named grid and emit tables and charts.
    Bench(BenchArgs),
    /// Render stored timing records as CSV, Markdown or SVG.
    Report(ReportArgs),
    /// Re-render the learning curve and summary of a finished training run.
    Replay(ReplayArgs),
    /// Stand-in external solver: advances the surrogate for one actuation in the current directory.
    #[command(hide = true)]
    MockSolver(MockSolverArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Run configuration file (`key = value` lines).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory [default: $AFC_OUT_DIR/<command>, else ./run]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra `key=value` overrides, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Number of parallel environments [default: 1]
    #[arg(long)]
    pub envs: Option<usize>,
    /// Solver ranks per environment [default: 1]
    #[arg(long)]
    pub ranks: Option<usize>,
    /// Training episodes (each runs every environment once) [default: 100]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// File exchange: baseline, optimized or disabled [default: disabled]
    #[arg(long)]
    pub io: Option<String>,
    /// Timing source: virtual (deterministic model) or real (wall clock) [default: virtual]
    #[arg(long)]
    pub mode: Option<String>,
    /// Checkpoint period in episodes, 0 to disable [default: 50]
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Start from this checkpoint instead of fresh weights.
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    /// virtual (cost model) or real (wall clock) [default: virtual]
    #[arg(long)]
    pub mode: Option<String>,
    /// Configuration grid: table1 or table2 [default: table1]
    #[arg(long)]
    pub grid: Option<String>,
    /// I/O strategy for table1 (table2 covers all three) [default: baseline]
    #[arg(long)]
    pub io: Option<String>,
    /// Environment-episodes per point [default: 3000 virtual, 20 real]
    #[arg(long)]
    pub episodes: Option<usize>,
    /// Real mode keeps the fastest of this many runs per point [default: 3]
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Efficiency reference: group (smallest env count per rank group) or global (1 env, 1 rank)
    #[arg(long, default_value = "group")]
    pub reference: String,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Records CSV written by `bench`.
    #[arg(long)]
    pub records: PathBuf,
    /// Breakdown CSV [default: breakdown.csv next to the records, if present]
    #[arg(long)]
    pub breakdown: Option<PathBuf>,
    /// csv, markdown, svg or strategies
    #[arg(long, default_value = "markdown")]
    pub format: String,
    /// Efficiency reference: group or global
    #[arg(long, default_value = "group")]
    pub reference: String,
    /// Output file [default: report.<ext> next to the records]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Training run directory (containing history.csv) or a history file.
    pub run: PathBuf,
    /// Output directory [default: the run directory]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reference drag coefficient for the reduction figure
    #[arg(long, default_value_t = 3.205)]
    pub drag_ref: f64,
}

#[derive(Debug, Args)]
pub struct MockSolverArgs {
    /// Reset seed used when no restart file exists.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Bundle format to write: baseline or optimized
    #[arg(long, default_value = "optimized")]
    pub io: String,
    /// Sleep before doing any work.
    #[arg(long, default_value_t = 0)]
    pub sleep_ms: u64,
    /// Exit with an error without writing anything.
    #[arg(long)]
    pub fail: bool,
    /// Work directory [default: current directory]
    #[arg(long)]
    pub workdir: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::Template { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Report(a) => cmd_report(a),
        Command::Replay(a) => cmd_replay(a),
        Command::MockSolver(a) => cmd_mock_solver(a),
    }
}

fn base_config(common: &Common, command: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Ok(root) = std::env::var("AFC_OUT_DIR") {
        if !root.is_empty() {
            cfg.out = Path::new(&root).join(command);
        }
    }
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        cfg.apply_text(&text)?;
    }
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::config(kv.clone(), "overrides take the form KEY=VALUE"))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(out) = &common.out {
        cfg.out = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

struct RunLog {
    path: PathBuf,
}

impl RunLog {
    fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(RunLog {
            path: dir.join("run.log"),
        })
    }

    fn line(&self, msg: &str) {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .unwrap_or(Duration::ZERO)
            .as_secs_f64();
        if let Ok(mut f) = OpenOptions::new().create(true).append(true).open(&self.path) {
            let _ = writeln!(f, "[{stamp:.3}] {msg}");
        }
    }
}

fn write_effective(cfg: &RunConfig) -> Result<()> {
    let path = cfg.out.join("effective.cfg");
    fs::write(&path, cfg.to_text()).map_err(|e| Error::io(&path, e))
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let mut cfg = base_config(&a.common, "train")?;
    if let Some(v) = a.envs {
        cfg.plan.n_envs = v;
    }
    if let Some(v) = a.ranks {
        cfg.plan.n_ranks = v;
    }
    if let Some(v) = a.episodes {
        cfg.episodes = v;
    }
    if let Some(v) = &a.io {
        cfg.set("io", v)?;
    }
    if let Some(v) = &a.mode {
        cfg.set("mode", v)?;
    }
    if let Some(v) = a.checkpoint_every {
        cfg.checkpoint_every = v;
    }
    cfg.validate()?;

    let log = RunLog::open(&cfg.out)?;
    write_effective(&cfg)?;
    log.line(&format!(
        "train: {} envs x {} ranks, {} episodes, io {}, mode {}",
        cfg.plan.n_envs, cfg.plan.n_ranks, cfg.episodes, cfg.strategy.mode, cfg.plan.mode
    ));
    let backend = if cfg.solver.program.is_empty() {
        SolverBackend::InProcess
    } else {
        SolverBackend::External {
            launcher: Launcher::new(cfg.solver.program.clone(), cfg.solver.args.clone()),
            template: cfg.solver.load_template()?,
            timeout: cfg.solver.timeout,
        }
    };
    let opts = TrainingOptions {
        episodes: cfg.episodes,
        seed: cfg.seed,
        strategy: cfg.strategy,
        backend,
        run_dir: Some(cfg.out.clone()),
        checkpoint_every: cfg.checkpoint_every,
        keep_files: cfg.keep_files,
        retain_trajectories: false,
        initial_params: a.init.as_deref().map(load_checkpoint).transpose()?,
        hidden: cfg.hidden,
    };
    let run = run_training_with(&cfg.plan, &cfg.env, &cfg.hyper, &opts, |r| {
        log.line(&format!(
            "episode {} reward {:.4} cd {:.4} wall {:.3}s",
            r.episode, r.mean_reward, r.mean_cd, r.wall_s
        ));
    })?;
    save_checkpoint(&cfg.out.join("final.afcp"), &run.params)?;
    let rows = read_history(&cfg.out.join("history.csv"))?;
    if let Some(s) = summarize(&rows, cfg.env.drag_ref, SUMMARY_WINDOW) {
        let path = cfg.out.join("summary.txt");
        fs::write(&path, s.to_text()).map_err(|e| Error::io(&path, e))?;
        println!(
            "trained {} episodes: mean C_D over last {} = {:.4}, drag reduction {:.2}% against {}",
            s.episodes, s.window, s.mean_cd, s.reduction_pct, cfg.env.drag_ref
        );
    }
    if let Some(e) = run.failure {
        log.line(&format!("halted: {e}"));
        return Err(e);
    }
    log.line("done");
    Ok(())
}

fn parse_reference(s: &str) -> Result<Reference> {
    match s {
        "group" => Ok(Reference::PerGroup),
        "global" => Ok(Reference::Fixed { n_envs: 1, n_ranks: 1 }),
        other => Err(Error::config(
            "reference",
            format!("`{other}` is not one of group, global"),
        )),
    }
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut cfg = base_config(&a.common, "bench")?;
    if let Some(v) = &a.mode {
        cfg.set("mode", v)?;
    }
    if let Some(v) = &a.grid {
        cfg.grid = v.clone();
    }
    match &a.io {
        Some(v) => cfg.set("io", v)?,
        None if cfg.strategy.mode == IoMode::Disabled && a.common.config.is_none() => {
            cfg.strategy.mode = IoMode::Baseline
        }
        None => {}
    }
    if let Some(v) = a.episodes {
        cfg.bench_episodes = v;
    }
    if let Some(v) = a.repetitions {
        cfg.repetitions = v;
    }
    let reference = parse_reference(&a.reference)?;
    let points = grid(&cfg.grid, &cfg.plan, &cfg.strategy)?;
    cfg.validate()?;

    let log = RunLog::open(&cfg.out)?;
    write_effective(&cfg)?;
    log.line(&format!(
        "bench: grid {}, mode {}, {} points",
        cfg.grid,
        cfg.plan.mode,
        points.len()
    ));
    let mut spec = match cfg.plan.mode {
        ExecutionMode::Virtual => SweepSpec::virtual_default(),
        ExecutionMode::Real => SweepSpec::real_default(),
    };
    if cfg.bench_episodes > 0 {
        spec.episodes = cfg.bench_episodes;
    }
    spec.repetitions = cfg.repetitions;
    spec.env = cfg.env.clone();
    spec.hyper = cfg.hyper.clone();
    spec.seed = cfg.seed;
    spec.scratch = Some(cfg.out.join("scratch"));
    let records = run_sweep(&points, &spec);
    let _ = fs::remove_dir_all(cfg.out.join("scratch"));
    for r in records.iter().filter(|r| !r.is_ok()) {
        log.line(&format!(
            "point {} envs x {} ranks ({}) failed: {}",
            r.n_envs,
            r.n_ranks,
            r.strategy,
            r.failure.as_deref().unwrap_or("")
        ));
    }
    let table = ScalingTable::new(records.clone(), reference);
    emit_report(&table, ReportFormat::Csv, &cfg.out.join("records.csv"))?;
    emit_report(&table, ReportFormat::Breakdown, &cfg.out.join("breakdown.csv"))?;
    emit_report(&table, ReportFormat::Markdown, &cfg.out.join("table.md"))?;
    emit_report(&table, ReportFormat::Svg, &cfg.out.join("charts.svg"))?;
    if cfg.grid == "table2" {
        let path = cfg.out.join("strategies.md");
        fs::write(&path, render_strategy_markdown(&records)).map_err(|e| Error::io(&path, e))?;
    }
    let failed = records.iter().filter(|r| !r.is_ok()).count();
    println!(
        "{} points ({} failed); reports in {}",
        records.len(),
        failed,
        cfg.out.display()
    );
    log.line("done");
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut records = read_records_csv(&a.records)?;
    let dir = a.records.parent().map(Path::to_path_buf).unwrap_or_default();
    let breakdown = a.breakdown.clone().or_else(|| {
        let p = dir.join("breakdown.csv");
        p.exists().then_some(p)
    });
    if let Some(p) = breakdown {
        read_breakdown_csv(&p, &mut records)?;
    }
    let reference = parse_reference(&a.reference)?;
    let (text, ext) = if a.format == "strategies" {
        (render_strategy_markdown(&records), "md")
    } else {
        let format: ReportFormat = a.format.parse()?;
        let table = ScalingTable::new(records, reference);
        let out = a
            .out
            .clone()
            .unwrap_or_else(|| dir.join(format!("report.{}", format.extension())));
        emit_report(&table, format, &out)?;
        println!("wrote {}", out.display());
        return Ok(());
    };
    let out = a.out.unwrap_or_else(|| dir.join(format!("report.{ext}")));
    fs::write(&out, text).map_err(|e| Error::io(&out, e))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_replay(a: ReplayArgs) -> Result<()> {
    let history = if a.run.is_dir() {
        a.run.join("history.csv")
    } else {
        a.run.clone()
    };
    let rows = read_history(&history)?;
    let out = a
        .out
        .unwrap_or_else(|| history.parent().map(Path::to_path_buf).unwrap_or_default());
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let svg = out.join("learning.svg");
    fs::write(&svg, render_history_svg(&rows, a.drag_ref)).map_err(|e| Error::io(&svg, e))?;
    if let Some(s) = summarize(&rows, a.drag_ref, SUMMARY_WINDOW) {
        let path = out.join("summary.txt");
        fs::write(&path, s.to_text()).map_err(|e| Error::io(&path, e))?;
        println!(
            "{} episodes: mean C_D over last {} = {:.4}, drag reduction {:.2}% against {}",
            s.episodes, s.window, s.mean_cd, s.reduction_pct, a.drag_ref
        );
    }
    Ok(())
}

fn cmd_mock_solver(a: MockSolverArgs) -> Result<()> {
    let io: IoMode = a.io.parse()?;
    if io == IoMode::Disabled {
        return Err(Error::config("io", "the mock solver must write a bundle"));
    }
    let workdir = match a.workdir {
        Some(d) => d,
        None => std::env::current_dir().map_err(|e| Error::io(".", e))?,
    };
    run_mock_solver(
        &workdir,
        &MockSolverOptions {
            seed: a.seed,
            sleep: Duration::from_millis(a.sleep_ms),
            io,
            fail: a.fail,
        },
    )
}
