use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_timed-nav"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_trivial(dir: &Path, obstacles: &str) {
    fs::write(dir.join("open.map"), "3 3 1\n...\n...\n...\n").unwrap();
    let inst = format!(
        r#"{{
  "map_path": "open.map",
  "robot": {{"radius": 0.5, "v_max": 1.0, "omega_max": 3.141592653589793}},
  "start": {{"x": 0.5, "y": 0.5, "theta": 0.0}},
  "goal": {{"x": 2.5, "y": 2.5}},
  "obstacles": [{obstacles}]
}}"#
    );
    fs::write(dir.join("trivial.json"), inst).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn plan_trivial_instance() {
    let dir = TempDir::new().unwrap();
    write_trivial(dir.path(), "");
    let out = run(dir.path(), &["plan", "--instance", "trivial.json", "--mode", "aat", "--out", "p.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let plan = read_json(&dir.path().join("p.json"));
    let arrival = plan["arrival_time"].as_f64().unwrap();
    assert!((arrival - (0.25 + 2.0 * 2f64.sqrt())).abs() < 1e-4, "{arrival}");

    let out = run(dir.path(), &["plan", "--instance", "trivial.json", "--mode", "sipp", "--out", "s.json"]);
    assert!(out.status.success());
    assert!((read_json(&dir.path().join("s.json"))["arrival_time"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn refine_and_simulate_write_outputs() {
    let dir = TempDir::new().unwrap();
    write_trivial(dir.path(), "");
    assert!(run(dir.path(), &["plan", "--instance", "trivial.json"]).status.success());
    let out = run(dir.path(), &["refine", "--plan", "plan.json", "--amax", "8", "--out", "ref.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("ref.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,theta,vx,vy,omega\n"));
    assert!(csv.lines().count() > 300);

    let out = run(
        dir.path(),
        &["simulate", "--instance", "trivial.json", "--plan", "plan.json", "--lambda1", "-4", "--lambda2", "-5"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let outcome = read_json(&dir.path().join("outcome.json"));
    assert_eq!(outcome["success"], Value::Bool(true));
    assert!(outcome["rmse2"].as_f64().unwrap() < outcome["rmse1"].as_f64().unwrap());
    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.lines().count() > 100);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(dir.path(), &["fly"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["plan"]).status.code(), Some(2));

    // An obstacle parked on the goal leaves no plan.
    write_trivial(dir.path(), r#"{"waypoints": [{"x": 2.5, "y": 2.5, "t": 0.0}]}"#);
    let out = run(dir.path(), &["plan", "--instance", "trivial.json"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = run(dir.path(), &["plan", "--instance", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    write_trivial(dir.path(), "");
    let out = run(dir.path(), &["simulate", "--instance", "trivial.json", "--plan", "nope.json"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn gen_and_bench_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let gen = |name: &str| {
        let out = run(
            dir.path(),
            &["--seed", "5", "gen", "--width", "10", "--height", "10", "--obstacles", "4", "--horizon", "15", "--name", name],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    };
    gen("a");
    gen("b");
    let a = read_json(&dir.path().join("a.json"));
    let b = read_json(&dir.path().join("b.json"));
    assert_eq!(a["obstacles"], b["obstacles"]);
    assert_eq!(a["start"], b["start"]);

    fs::write(dir.path().join("small.map"), "8 8 1\n........\n.@@..@@.\n........\n........\n.@@..@@.\n........\n........\n........\n").unwrap();
    fs::write(
        dir.path().join("bench.json"),
        r#"{"map": {"kind": "file", "path": "small.map"}, "n_instances": 3, "n_obstacles": 2,
            "a_max": [5, 15], "inflation": [0, 0.2], "generator": {"horizon": 10, "keep_out": 1}}"#,
    )
    .unwrap();
    let bench = |out_dir: &str| {
        let out = run(dir.path(), &["--seed", "2", "bench", "--config", "bench.json", "--out-dir", out_dir, "--format", "csv"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let first = bench("r1");
    assert_eq!(first, bench("r2"));
    assert!(first.starts_with("a_max,inflation,success_rate"));
    assert_eq!(first.lines().count(), 5);
    for f in ["bench.csv", "bench.txt", "bench_grid.txt", "bench.json"] {
        assert_eq!(
            fs::read(dir.path().join("r1").join(f)).unwrap(),
            fs::read(dir.path().join("r2").join(f)).unwrap(),
            "{f} differs"
        );
    }
    let out = run(dir.path(), &["bench", "--config", "bench.json", "--format", "xml"]);
    assert_eq!(out.status.code(), Some(1));
}
