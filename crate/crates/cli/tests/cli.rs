use std::fs;
use std::process::Command;

fn sse() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sse"))
}

#[test]
fn solve_writes_results_and_policy() {
    let dir = tempfile::tempdir().unwrap();
    let out = sse()
        .args(["solve", "--game", "centipede", "--method", "H", "--horizon", "3", "--seed", "1", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("centipede-3,3,H,2.000000,"), "{row}");
    assert!(row.ends_with(",5,0.000000,ok"), "{row}");
    assert!(dir.path().join("policies/centipede-3-3-H.json").exists());
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn solve_reads_a_game_file() {
    let dir = tempfile::tempdir().unwrap();
    let game = dir.path().join("tiger.json");
    let status = sse()
        .args(["export", "--benchmark", "dec-tiger", "--horizon", "2", "--out"])
        .arg(&game)
        .status()
        .unwrap();
    assert!(status.success());
    let out = sse().args(["solve", "--method", "MILP", "--game"]).arg(&game).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().nth(1).unwrap().contains(",2,MILP,40.000000,"), "{stdout}");
}

#[test]
fn capacity_exits_with_two() {
    let out = sse()
        .args(["solve", "--game", "match", "--method", "LP", "--horizon", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stdout).unwrap().contains("---,---,---,---,capacity"));
}

#[test]
fn budget_exits_with_three() {
    let out = sse()
        .args(["solve", "--game", "mabc", "--method", "H", "--horizon", "6", "--budget", "0.000001"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn bound_prints_the_closed_form() {
    let out = sse()
        .args(["bound", "--m", "1", "--gamma", "0.5", "--horizon", "2", "--sigma", "0.1"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((v - 0.4).abs() < 1e-15);
    let bad = sse()
        .args(["bound", "--m", "1", "--gamma", "1", "--horizon", "2", "--sigma", "0.1"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn small_bench_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = sse()
            .args(["bench", "--suite", "table1", "--seed", "3", "--benchmarks", "centipede,match"])
            .args(["--horizons", "1,2,3", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out.join("results.csv")).unwrap()
    };
    let a = run("a");
    assert_eq!(a, run("b"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 6);
    assert!(text.contains("match,3,H,0.000000,-,4,0.000000,ok"));
}

#[test]
fn unknown_inputs_are_rejected() {
    let out = sse().args(["solve", "--game", "chess"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = sse().args(["solve", "--game", "match", "--method", "QP"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = sse().args(["bench", "--suite", "table9", "--out", "/tmp/x"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}
