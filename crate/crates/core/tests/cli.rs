use std::path::Path;
use std::process::{Command, Output};

fn afc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_afc"))
        .args(args)
        .env_remove("AFC_OUT_DIR")
        .output()
        .expect("afc runs")
}

fn ok(args: &[&str]) -> Output {
    let out = afc(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_lines(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

fn train(out: &Path, episodes: &str) {
    let out = out.to_str().unwrap();
    ok(&[
        "train",
        "--envs",
        "2",
        "--episodes",
        episodes,
        "--seed",
        "4",
        "--set",
        "hidden=16",
        "--out",
        out,
    ]);
}

#[test]
fn train_writes_history_checkpoints_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&[
        "train",
        "--episodes",
        "50",
        "--set",
        "hidden=16",
        "--checkpoint-every",
        "25",
        "--out",
        run.to_str().unwrap(),
    ]);
    assert_eq!(data_lines(&run.join("history.csv")), 50);
    for name in [
        "final.afcp",
        "summary.txt",
        "run.log",
        "effective.cfg",
        "checkpoints/episode_00050.afcp",
    ] {
        assert!(run.join(name).exists(), "{name} missing");
    }
    let resumed = dir.path().join("resumed");
    ok(&[
        "train",
        "--episodes",
        "2",
        "--set",
        "hidden=16",
        "--init",
        run.join("final.afcp").to_str().unwrap(),
        "--out",
        resumed.to_str().unwrap(),
    ]);
    assert_eq!(data_lines(&resumed.join("history.csv")), 2);
}

#[test]
fn identical_invocations_give_identical_history() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    train(&a, "3");
    train(&b, "3");
    let read = |p: &Path| std::fs::read(p.join("history.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["train", "--envs", "0", "--out", out],
        vec!["train", "--set", "no_such_key=1", "--out", out],
        vec!["train", "--io", "fast", "--out", out],
        vec!["bench", "--grid", "table9", "--out", out],
        vec!["frobnicate"],
    ] {
        assert_eq!(afc(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = afc(&["replay", dir.path().join("missing").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn bench_grids_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = dir.path().join("t1");
    let t2 = dir.path().join("t2");
    ok(&["bench", "--out", t1.to_str().unwrap()]);
    ok(&["bench", "--grid", "table2", "--out", t2.to_str().unwrap()]);
    assert_eq!(data_lines(&t1.join("records.csv")), 26);
    assert_eq!(data_lines(&t2.join("records.csv")), 33);
    for name in ["table.md", "charts.svg", "breakdown.csv"] {
        assert!(t1.join(name).exists(), "{name} missing");
    }
    assert!(t2.join("strategies.md").exists());

    let records = t1.join("records.csv");
    for (format, file) in [("csv", "r.csv"), ("markdown", "r.md"), ("svg", "r.svg")] {
        let target = dir.path().join(file);
        ok(&[
            "report",
            "--records",
            records.to_str().unwrap(),
            "--format",
            format,
            "--out",
            target.to_str().unwrap(),
        ]);
        assert!(std::fs::metadata(&target).unwrap().len() > 0);
    }
    let md = std::fs::read_to_string(dir.path().join("r.md")).unwrap();
    assert!(md.contains("| 3000 | 12 | 5 | 60 |"));
    assert_eq!(
        std::fs::read(dir.path().join("r.md")).unwrap(),
        std::fs::read(t1.join("table.md")).unwrap()
    );
}

#[test]
fn replay_rerenders_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    train(&run, "2");
    let replayed = dir.path().join("replay");
    ok(&["replay", run.to_str().unwrap(), "--out", replayed.to_str().unwrap()]);
    assert!(replayed.join("learning.svg").exists());
    let summary = std::fs::read_to_string(replayed.join("summary.txt")).unwrap();
    assert!(summary.contains("episodes = 2"));
}

#[test]
fn out_dir_defaults_to_the_environment_root() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_afc"))
        .args(["bench"])
        .env("AFC_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("bench/records.csv").exists());
}
