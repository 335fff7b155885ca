use std::collections::BTreeMap;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::bundle::{indices_from_path, read_bundle, write_action, write_bundle};
use super::template::{render_template, SolverTemplate, TemplateValue};
use super::{shortest, ActuationBundle, IoMode, IoStrategy};
use crate::env::{self, EnvConfig, SurrogateState};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Rendered into `solver.cfg` for the bundled mock solver.
pub const MOCK_TEMPLATE: &str =
    "jet_velocity = {{jet_velocity}}\nstart_time = {{start_time}}\nend_time = {{end_time}}\n";

const LOG_FILE: &str = "solver.log";
pub(crate) const RESTART_FILE: &str = "restart.txt";

/// How to start one solver instance: a program and its arguments, run inside the work directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Launcher {
    pub program: String,
    pub args: Vec<String>,
}

impl Launcher {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Launcher {
            program: program.into(),
            args: args.into_iter().map(Into::into).collect(),
        }
    }

    fn resolve(&self) -> Result<PathBuf> {
        let p = Path::new(&self.program);
        let found = if p.components().count() > 1 || p.is_absolute() {
            p.is_file().then(|| p.to_path_buf())
        } else {
            std::env::var_os("PATH")
                .and_then(|paths| std::env::split_paths(&paths).map(|d| d.join(p)).find(|c| c.is_file()))
        };
        found.ok_or_else(|| Error::Spawn {
            program: self.program.clone(),
            detail: "executable not found".into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExternalOutcome {
    pub bundle: ActuationBundle,
    pub wall: Duration,
    pub bytes_written: u64,
    pub bytes_read: u64,
}

fn tail(path: &Path) -> String {
    let text = fs::read(path)
        .map(|b| String::from_utf8_lossy(&b).into_owned())
        .unwrap_or_default();
    let lines: Vec<&str> = text.lines().collect();
    lines[lines.len().saturating_sub(20)..].join("\n")
}

fn dir_bytes(dir: &Path, names: &[&str]) -> u64 {
    names
        .iter()
        .filter_map(|n| fs::metadata(dir.join(n)).ok())
        .map(|m| m.len())
        .sum()
}

/// Runs one actuation period through an external solver process.
///
/// The learner side smooths the action, renders the solver configuration and writes the action
/// file into `workdir`; the solver is expected to leave a bundle there under `strategy`.
#[allow(clippy::too_many_arguments)]
pub fn run_external_actuation(
    workdir: &Path,
    launcher: &Launcher,
    template: &SolverTemplate,
    previous: &ActuationBundle,
    action: f64,
    config: &EnvConfig,
    strategy: &IoStrategy,
    timeout: Duration,
) -> Result<ExternalOutcome> {
    if strategy.mode == IoMode::Disabled {
        return Err(Error::config(
            "io",
            "an external solver needs file exchange; the disabled strategy is for benchmarking only",
        ));
    }
    let program = launcher.resolve()?;
    let started = Instant::now();

    let (jet, _) = env::jet_command(previous.jet_velocity, action, config);
    let start_time = previous.rows.last().map_or(0.0, |r| r.t);
    let end_time = start_time + config.actuation_period();
    let values: BTreeMap<String, TemplateValue> = [
        ("jet_velocity", jet.into()),
        ("start_time", start_time.into()),
        ("end_time", end_time.into()),
    ]
    .into_iter()
    .map(|(k, v): (&str, TemplateValue)| (k.to_owned(), v))
    .collect();
    let rendered = render_template(template, &values)?;

    fs::create_dir_all(workdir).map_err(|e| Error::io(workdir, e))?;
    let cfg_path = workdir.join(&template.target);
    fs::write(&cfg_path, &rendered).map_err(|e| Error::io(&cfg_path, e))?;
    let mut bytes_written = rendered.len() as u64;
    bytes_written += write_action(workdir, action, strategy)?;

    let log_path = workdir.join(LOG_FILE);
    let log = File::create(&log_path).map_err(|e| Error::io(&log_path, e))?;
    let log_err = log.try_clone().map_err(|e| Error::io(&log_path, e))?;
    let mut child = Command::new(&program)
        .args(&launcher.args)
        .current_dir(workdir)
        .stdin(Stdio::null())
        .stdout(log)
        .stderr(log_err)
        .spawn()
        .map_err(|e| Error::Spawn {
            program: launcher.program.clone(),
            detail: e.to_string(),
        })?;

    let deadline = started + timeout;
    let status = loop {
        match child.try_wait().map_err(|e| Error::io(&program, e))? {
            Some(status) => break status,
            None if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Timeout {
                    limit: timeout,
                    tail: tail(&log_path),
                });
            }
            None => std::thread::sleep(Duration::from_millis(1).min(deadline - Instant::now())),
        }
    };
    if !status.success() {
        return Err(Error::Solver {
            status: status.to_string(),
            tail: tail(&log_path),
        });
    }

    let bundle = read_bundle(workdir, strategy)?;
    bundle.check_counts(config)?;
    let bytes_read = match strategy.mode {
        IoMode::Optimized => dir_bytes(workdir, &["step.bin"]),
        _ => dir_bytes(workdir, &["probes.txt", "coeffs.csv", "field.dat"]),
    };
    Ok(ExternalOutcome {
        bundle,
        wall: started.elapsed(),
        bytes_written,
        bytes_read,
    })
}

/// Persists the oscillator state a solver resumes from (`x y jet steps actuation`).
pub(crate) fn write_restart(path: &Path, state: &SurrogateState) -> Result<()> {
    let text = format!(
        "{} {} {} {} {}\n",
        shortest(state.x),
        shortest(state.y),
        shortest(state.jet_velocity),
        state.steps,
        state.actuation
    );
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// `Ok(None)` when no restart file exists yet.
pub(crate) fn read_restart(path: &Path, seed: u64) -> Result<Option<SurrogateState>> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let f: Vec<&str> = text.split_whitespace().collect();
    let bad = || Error::format(path, 0, "expected `x y jet steps actuation`");
    if f.len() != 5 {
        return Err(bad());
    }
    Ok(Some(SurrogateState {
        x: f[0].parse().map_err(|_| bad())?,
        y: f[1].parse().map_err(|_| bad())?,
        jet_velocity: f[2].parse().map_err(|_| bad())?,
        steps: f[3].parse().map_err(|_| bad())?,
        actuation: f[4].parse().map_err(|_| bad())?,
        rng: SplitMix64::new(seed),
    }))
}

#[derive(Debug, Clone)]
pub struct MockSolverOptions {
    pub seed: u64,
    pub sleep: Duration,
    pub io: IoMode,
    pub fail: bool,
}

fn parse_cfg(text: &str, path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let trimmed = line.trim();
        if !trimmed.is_empty() && !trimmed.starts_with('#') {
            let (k, v) = trimmed
                .split_once('=')
                .ok_or_else(|| Error::format(path, offset, "expected `key = value`"))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::format(path, offset, format!("`{}` is not a number", v.trim())))?;
            out.insert(k.trim().to_owned(), v);
        }
        offset += line.len() as u64 + 1;
    }
    Ok(out)
}

/// Stand-in solver: advances the surrogate for the configured period inside `workdir`.
///
/// State carries over between actuations through `../restart.txt` (the environment directory);
/// the first call starts on the limit cycle at the phase given by `seed`.
pub fn run_mock_solver(workdir: &Path, opts: &MockSolverOptions) -> Result<()> {
    if !opts.sleep.is_zero() {
        std::thread::sleep(opts.sleep);
    }
    if opts.fail {
        eprintln!("mock solver: failure requested");
        return Err(Error::Contract("mock solver asked to fail".into()));
    }
    let config = EnvConfig::default();
    let cfg_path = workdir.join("solver.cfg");
    let text = fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
    let cfg = parse_cfg(&text, &cfg_path)?;
    let get = |k: &str| {
        cfg.get(k)
            .copied()
            .ok_or_else(|| Error::format(&cfg_path, 0, format!("missing `{k}`")))
    };
    let jet = get("jet_velocity")?;
    let start = get("start_time")?;
    let end = get("end_time")?;

    let restart = workdir
        .parent()
        .map(|p| p.join(RESTART_FILE))
        .ok_or_else(|| Error::Contract("work directory has no parent".into()))?;
    let mut state = match read_restart(&restart, opts.seed)? {
        Some(state) => state,
        None => env::reset(&config, opts.seed).0,
    };

    state.jet_velocity = jet;
    let steps = ((end - start) / config.dt).round() as usize;
    let mut rows = Vec::with_capacity(steps);
    for _ in 0..steps {
        state = env::rk4_step(&state, &config)?;
        let (cd, cl) = env::coefficients(&state, &config);
        rows.push(env::StepRecord {
            t: state.time(&config),
            cd,
            cl,
        });
    }
    state.actuation += 1;

    let (episode, actuation) = indices_from_path(workdir)?;
    let bundle = ActuationBundle {
        episode,
        actuation,
        probes: env::observe(&state, &config),
        rows,
        jet_velocity: state.jet_velocity,
    };
    write_bundle(workdir, &bundle, &IoStrategy::new(opts.io))?;
    write_restart(&restart, &state)?;
    println!("mock solver: advanced {steps} steps to t = {}", state.time(&config));
    Ok(())
}
