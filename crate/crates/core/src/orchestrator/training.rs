use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{derive_env_seed, virtual_episode_time, ExecutionMode, ParallelPlan};
use crate::coupling::{
    bundle_dir, read_bundle, run_external_actuation, shortest, write_action, write_bundle, write_restart,
    ActuationBundle, IoMode, IoStrategy, Launcher, SolverTemplate, RESTART_FILE,
};
use crate::env::{self, EnvConfig, SurrogateEnv};
use crate::error::{Error, Result};
use crate::ppo::{
    policy_forward, sample_action, save_checkpoint, Learner, ObsNormalizer, PolicyParams, PpoHyper, Trajectory,
    Transition, UpdateStats,
};
use crate::rng::SplitMix64;

pub const HISTORY_HEADER: &str = "episode,mean_reward,mean_cd,wall_s,solver_s,io_s,update_s";

const LEARNER_SALT: u64 = 0x6c65_6172_6e65_7221;

/// Who advances the flow between actions.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverBackend {
    /// The surrogate, integrated inside the rollout worker.
    InProcess,
    /// One external process per actuation, coupled through files.
    External {
        launcher: Launcher,
        template: SolverTemplate,
        timeout: Duration,
    },
}

#[derive(Debug, Clone)]
pub struct TrainingOptions {
    pub episodes: usize,
    pub seed: u64,
    pub strategy: IoStrategy,
    pub backend: SolverBackend,
    /// Root for exchange files, `history.csv` and checkpoints. Required unless I/O is disabled.
    pub run_dir: Option<PathBuf>,
    /// Checkpoint period in episodes; 0 turns checkpoints off.
    pub checkpoint_every: usize,
    /// Leave per-actuation exchange directories on disk.
    pub keep_files: bool,
    /// Keep full trajectories in the returned reports (memory grows with episodes × envs).
    pub retain_trajectories: bool,
    pub initial_params: Option<PolicyParams>,
    pub hidden: usize,
}

impl Default for TrainingOptions {
    fn default() -> Self {
        TrainingOptions {
            episodes: 1,
            seed: 0,
            strategy: IoStrategy::disabled(),
            backend: SolverBackend::InProcess,
            run_dir: None,
            checkpoint_every: 50,
            keep_files: false,
            retain_trajectories: false,
            initial_params: None,
            hidden: 512,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnvTiming {
    pub solver_s: f64,
    pub io_s: f64,
    pub idle_s: f64,
    pub bytes_moved: u64,
    pub sanitized_actions: usize,
}

impl EnvTiming {
    pub fn busy_s(&self) -> f64 {
        self.solver_s + self.io_s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    pub episode: usize,
    /// Empty unless [`TrainingOptions::retain_trajectories`] is set.
    pub trajectories: Vec<Trajectory>,
    pub env_timings: Vec<EnvTiming>,
    pub update_s: f64,
    pub wall_s: f64,
    /// Undiscounted episode return averaged over environments.
    pub mean_reward: f64,
    /// Drag coefficient averaged over every integration step of every environment.
    pub mean_cd: f64,
    /// `None` when the episode was aborted before the update.
    pub update: Option<UpdateStats>,
}

impl EpisodeReport {
    pub fn history_row(&self) -> String {
        let n = self.env_timings.len().max(1) as f64;
        let solver: f64 = self.env_timings.iter().map(|t| t.solver_s).sum::<f64>() / n;
        let io: f64 = self.env_timings.iter().map(|t| t.io_s).sum::<f64>() / n;
        format!(
            "{},{},{},{},{},{},{}",
            self.episode,
            shortest(self.mean_reward),
            shortest(self.mean_cd),
            shortest(self.wall_s),
            shortest(solver),
            shortest(io),
            shortest(self.update_s)
        )
    }
}

/// Outcome of a training run. A failed environment stops the run; `reports` still holds every
/// finished episode plus the aborted one.
#[derive(Debug)]
pub struct TrainingRun {
    pub reports: Vec<EpisodeReport>,
    pub params: PolicyParams,
    pub failure: Option<Error>,
}

impl TrainingRun {
    pub fn into_result(self) -> Result<(Vec<EpisodeReport>, PolicyParams)> {
        match self.failure {
            Some(e) => Err(e),
            None => Ok((self.reports, self.params)),
        }
    }
}

struct Worker {
    id: usize,
    env: SurrogateEnv,
    resets: SplitMix64,
    actions: ChaCha8Rng,
}

impl Worker {
    fn new(id: usize, master: u64, config: &EnvConfig) -> Result<Self> {
        let seed = derive_env_seed(master, id);
        Ok(Worker {
            id,
            env: SurrogateEnv::new(config.clone(), seed)?,
            resets: SplitMix64::new(seed),
            actions: ChaCha8Rng::seed_from_u64(seed),
        })
    }
}

struct Rollout {
    trajectory: Trajectory,
    raw_observations: Vec<Vec<f64>>,
    timing: EnvTiming,
    cd_sum: f64,
    cd_count: usize,
}

struct RolloutContext<'a> {
    episode: usize,
    params: &'a PolicyParams,
    normalizer: Option<&'a ObsNormalizer>,
    strategy: &'a IoStrategy,
    backend: &'a SolverBackend,
    run_dir: Option<&'a Path>,
    keep_files: bool,
}

impl RolloutContext<'_> {
    fn input(&self, raw: &[f64]) -> Vec<f64> {
        match self.normalizer {
            Some(n) => n.apply(raw),
            None => raw.to_vec(),
        }
    }

    fn exchange_dir(&self, env_id: usize, k: usize) -> Result<PathBuf> {
        let root = self
            .run_dir
            .ok_or_else(|| Error::config("out", "file exchange needs a run directory"))?;
        let dir = bundle_dir(root, self.episode, env_id, k);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }
}

fn rollout(worker: &mut Worker, ctx: &RolloutContext<'_>) -> Result<Rollout> {
    let config = worker.env.config().clone();
    let actuations = config.actuations_per_episode;
    let mut raw = worker.env.reset(worker.resets.next_u64());
    let mut timing = EnvTiming::default();
    let mut transitions = Vec::with_capacity(actuations);
    let mut raw_observations = Vec::with_capacity(actuations + 1);
    let (mut cd_sum, mut cd_count) = (0.0, 0);

    let mut previous = ActuationBundle {
        episode: ctx.episode,
        actuation: 0,
        probes: raw.clone(),
        rows: Vec::new(),
        jet_velocity: 0.0,
    };
    if let SolverBackend::External { .. } = ctx.backend {
        let env_dir = ctx.exchange_dir(worker.id, 0)?;
        let env_dir = env_dir.parent().expect("layout has a parent");
        write_restart(&env_dir.join(RESTART_FILE), worker.env.state())?;
    }

    for k in 0..actuations {
        let input = ctx.input(&raw);
        let (mean, log_std) = policy_forward(ctx.params, &input)?;
        let (action, log_prob) = sample_action(mean, log_std, &mut worker.actions);

        let (next, reward, rows) = match ctx.backend {
            SolverBackend::InProcess => {
                let t0 = Instant::now();
                let out = worker.env.actuate(action)?;
                timing.solver_s += t0.elapsed().as_secs_f64();
                timing.sanitized_actions += usize::from(out.sanitized);
                if ctx.strategy.mode == IoMode::Disabled {
                    (out.observation, out.reward, out.records)
                } else {
                    let t0 = Instant::now();
                    let dir = ctx.exchange_dir(worker.id, k)?;
                    timing.bytes_moved += write_action(&dir, action, ctx.strategy)?;
                    let sent = ActuationBundle::from_outcome(ctx.episode, k, &out);
                    timing.bytes_moved += write_bundle(&dir, &sent, ctx.strategy)?;
                    let got = read_bundle(&dir, ctx.strategy)?;
                    timing.bytes_moved += ctx.strategy.payload_bytes();
                    if !ctx.keep_files {
                        fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                    }
                    timing.io_s += t0.elapsed().as_secs_f64();
                    let reward = env::compute_reward(&got.rows, &config)?;
                    (got.probes, reward, got.rows)
                }
            }
            SolverBackend::External {
                launcher,
                template,
                timeout,
            } => {
                let dir = ctx.exchange_dir(worker.id, k)?;
                timing.sanitized_actions += usize::from(!action.is_finite());
                let out = run_external_actuation(
                    &dir,
                    launcher,
                    template,
                    &previous,
                    action,
                    &config,
                    ctx.strategy,
                    *timeout,
                )?;
                timing.solver_s += out.wall.as_secs_f64();
                timing.bytes_moved += out.bytes_written + out.bytes_read;
                if !ctx.keep_files {
                    fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                }
                let reward = env::compute_reward(&out.bundle.rows, &config)?;
                previous = out.bundle.clone();
                (out.bundle.probes, reward, out.bundle.rows)
            }
        };
        cd_sum += rows.iter().map(|r| r.cd).sum::<f64>();
        cd_count += rows.len();
        raw_observations.push(std::mem::replace(&mut raw, next));
        transitions.push(Transition {
            observation: input,
            action,
            log_prob,
            reward,
            value: 0.0,
            terminal: false,
        });
    }

    let values = {
        let dim = ctx.params.obs_dim();
        let mut obs = Array2::zeros((transitions.len(), dim));
        for (mut row, t) in obs.rows_mut().into_iter().zip(&transitions) {
            row.assign(&ndarray::ArrayView1::from(&t.observation[..]));
        }
        ctx.params.value.forward_batch(obs.view()).0
    };
    for (t, v) in transitions.iter_mut().zip(values) {
        t.value = v;
    }
    let final_observation = ctx.input(&raw);
    raw_observations.push(raw);
    let trajectory = Trajectory::new(worker.id, ctx.episode, transitions, final_observation, actuations)?;
    Ok(Rollout {
        trajectory,
        raw_observations,
        timing,
        cd_sum,
        cd_count,
    })
}

fn write_history_header(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{HISTORY_HEADER}").map_err(|e| Error::io(path, e))?;
    Ok(w)
}

/// Trains with synchronous episodes; see [`run_training_with`].
pub fn run_training(
    plan: &ParallelPlan,
    config: &EnvConfig,
    hyper: &PpoHyper,
    opts: &TrainingOptions,
) -> Result<TrainingRun> {
    run_training_with(plan, config, hyper, opts, |_| {})
}

/// Trains for `opts.episodes` synchronous episodes, calling `observe` after each one.
///
/// Per episode every environment rolls out a full episode against the same parameter snapshot,
/// all rollouts meet at a barrier, and the learner updates once on the pooled trajectories.
/// Trajectories depend only on the snapshot and the environment's seed.
pub fn run_training_with(
    plan: &ParallelPlan,
    config: &EnvConfig,
    hyper: &PpoHyper,
    opts: &TrainingOptions,
    mut observe: impl FnMut(&EpisodeReport),
) -> Result<TrainingRun> {
    plan.validate()?;
    config.validate()?;
    hyper.validate()?;
    let needs_dir = opts.strategy.mode != IoMode::Disabled || matches!(opts.backend, SolverBackend::External { .. });
    if needs_dir && opts.run_dir.is_none() {
        return Err(Error::config("out", "file exchange needs a run directory"));
    }
    if matches!(opts.backend, SolverBackend::External { .. }) && opts.strategy.mode == IoMode::Disabled {
        return Err(Error::config(
            "io",
            "an external solver needs file exchange; the disabled strategy is for benchmarking only",
        ));
    }
    let params = match &opts.initial_params {
        Some(p) if p.obs_dim() != config.obs_dim => {
            return Err(Error::config(
                "checkpoint",
                format!(
                    "network expects {} observations, environment emits {}",
                    p.obs_dim(),
                    config.obs_dim
                ),
            ))
        }
        Some(p) => p.clone(),
        None => PolicyParams::init(config.obs_dim, opts.hidden, opts.seed),
    };
    let learner_seed = SplitMix64::new(opts.seed ^ LEARNER_SALT).next_u64();
    let mut learner = Learner::new(params, hyper.clone(), learner_seed);
    let mut normalizer = hyper.normalize_obs.then(|| ObsNormalizer::new(config.obs_dim));
    let mut workers = (0..plan.n_envs)
        .map(|id| Worker::new(id, opts.seed, config))
        .collect::<Result<Vec<_>>>()?;

    let mut history = match &opts.run_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            Some((write_history_header(&dir.join("history.csv"))?, dir.join("history.csv")))
        }
        None => None,
    };
    let model = virtual_episode_time(
        plan,
        opts.strategy.bytes_moved_per_actuation(),
        config.actuations_per_episode,
    )?;

    let mut reports = Vec::with_capacity(opts.episodes);
    for episode in 0..opts.episodes {
        let started = Instant::now();
        let ctx = RolloutContext {
            episode,
            params: &learner.params,
            normalizer: normalizer.as_ref(),
            strategy: &opts.strategy,
            backend: &opts.backend,
            run_dir: opts.run_dir.as_deref(),
            keep_files: opts.keep_files,
        };
        let outcomes: Vec<Result<Rollout>> = match plan.mode {
            ExecutionMode::Virtual => workers.iter_mut().map(|w| rollout(w, &ctx)).collect(),
            ExecutionMode::Real => std::thread::scope(|scope| {
                let handles: Vec<_> = workers
                    .iter_mut()
                    .map(|w| {
                        let ctx = &ctx;
                        scope.spawn(move || rollout(w, ctx))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| {
                        h.join()
                            .unwrap_or_else(|_| Err(Error::Contract("rollout worker panicked".into())))
                    })
                    .collect()
            }),
        };

        let mut rollouts = Vec::with_capacity(outcomes.len());
        let mut failure = None;
        for (id, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(r) => rollouts.push(r),
                Err(e) if failure.is_none() => {
                    failure = Some(Error::Environment {
                        env: id,
                        episode,
                        source: Box::new(e),
                    })
                }
                Err(_) => {}
            }
        }
        let rollout_wall = started.elapsed().as_secs_f64();
        if needs_dir && !opts.keep_files {
            if let Some(dir) = &opts.run_dir {
                let episode_dir = dir.join(episode.to_string());
                if episode_dir.exists() {
                    fs::remove_dir_all(&episode_dir).map_err(|e| Error::io(&episode_dir, e))?;
                }
            }
        }

        let trajectories: Vec<Trajectory> = rollouts.iter().map(|r| r.trajectory.clone()).collect();
        let (update, update_s) = if failure.is_none() {
            let t0 = Instant::now();
            match learner.update(&trajectories) {
                Ok(stats) => (Some(stats), t0.elapsed().as_secs_f64()),
                Err(e) => {
                    failure = Some(e);
                    (None, t0.elapsed().as_secs_f64())
                }
            }
        } else {
            (None, 0.0)
        };
        if let (Some(n), None) = (normalizer.as_mut(), &failure) {
            for r in &rollouts {
                for o in &r.raw_observations {
                    n.observe(o);
                }
            }
        }

        let mut env_timings: Vec<EnvTiming> = rollouts.iter().map(|r| r.timing).collect();
        let (wall_s, update_s) = match plan.mode {
            ExecutionMode::Virtual => {
                for t in &mut env_timings {
                    t.solver_s = model.solver_s;
                    t.io_s = model.io_s;
                    t.idle_s = 0.0;
                }
                (model.wall_s, model.update_s)
            }
            ExecutionMode::Real => {
                let busiest = env_timings.iter().map(EnvTiming::busy_s).fold(0.0, f64::max);
                let span = rollout_wall.max(busiest);
                for t in &mut env_timings {
                    t.idle_s = span - t.busy_s();
                }
                (span + update_s, update_s)
            }
        };
        let n = rollouts.len().max(1) as f64;
        let mean_reward = rollouts.iter().map(|r| r.trajectory.total_reward()).sum::<f64>() / n;
        let cd_count: usize = rollouts.iter().map(|r| r.cd_count).sum();
        let mean_cd = rollouts.iter().map(|r| r.cd_sum).sum::<f64>() / cd_count.max(1) as f64;
        let report = EpisodeReport {
            episode,
            trajectories: if opts.retain_trajectories {
                trajectories
            } else {
                Vec::new()
            },
            env_timings,
            update_s,
            wall_s,
            mean_reward,
            mean_cd,
            update,
        };

        if let Some((w, path)) = history.as_mut() {
            writeln!(w, "{}", report.history_row()).map_err(|e| Error::io(&*path, e))?;
            w.flush().map_err(|e| Error::io(&*path, e))?;
        }
        observe(&report);
        reports.push(report);
        if let Some(e) = failure {
            return Ok(TrainingRun {
                reports,
                params: learner.params,
                failure: Some(e),
            });
        }
        if let Some(dir) = &opts.run_dir {
            if opts.checkpoint_every > 0 && (episode + 1) % opts.checkpoint_every == 0 {
                let path = dir.join("checkpoints").join(format!("episode_{:05}.afcp", episode + 1));
                fs::create_dir_all(path.parent().expect("has parent")).map_err(|e| Error::io(dir, e))?;
                save_checkpoint(&path, &learner.params)?;
            }
        }
    }
    Ok(TrainingRun {
        reports,
        params: learner.params,
        failure: None,
    })
}
