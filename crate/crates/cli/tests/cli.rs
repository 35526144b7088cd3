use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const LOOP: &str = "\
ap p
state a sys {}
state b env {}
state c sys {p}
init a known
trans a go@sys b
trans b l@env c
trans b r@env c
trans c go@sys b
";

const HIDDEN: &str = "\
ap p
pred b0 hidden
state s0 sys {}
state s1 sys {} b0=1
state hub env {p}
state trap env {}
init hub known
trans s0 a0@sys hub
trans s0 a1@sys trap
trans s1 a0@sys trap
trans s1 a1@sys hub
trans hub e0@env s0
trans hub e1@env s1
trans trap stay@env trap
sense bit0 b0
";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beliefplan")).args(args).output().unwrap()
}

fn files(dir: &Path, model: &str, spec: &str) -> (PathBuf, PathBuf) {
    let (m, s) = (dir.join("game.model"), dir.join("game.spec"));
    std::fs::write(&m, model).unwrap();
    std::fs::write(&s, spec).unwrap();
    (m, s)
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_1_and_help_exits_0() {
    assert_eq!(bin(&[]).status.code(), Some(1));
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));
    assert_eq!(bin(&["--version"]).status.code(), Some(0));
    assert_eq!(bin(&["simulate", "x", "y", "--steps", "0"]).status.code(), Some(1));
    assert_eq!(bin(&["simulate", "x", "y", "--env", "adversarial"]).status.code(), Some(1));
    // Flags are checked before the model is read.
    assert_eq!(bin(&["simulate", "missing.model", "y", "--env", "scripted:"]).status.code(), Some(1));
}

#[test]
fn model_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), "state a sys {}\ninit a\n", "GF p");
    let out = bin(&["solve", p(&m), p(&s)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert_eq!(bin(&["solve", "missing.model", p(&s)]).status.code(), Some(2));
    let (m, s) = files(dir.path(), LOOP, "GF q");
    assert_eq!(bin(&["solve", p(&m), p(&s)]).status.code(), Some(2));
}

#[test]
fn solve_trivial_game() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), "ap p\nstate a sys {p}\ninit a\ntrans a x@sys a\n", "GF p");
    let export = dir.path().join("solution.json");
    let out = bin(&["solve", p(&m), p(&s), "--export", p(&export)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("states: 1\n") && text.contains("winning: 1\n") && text.contains("max_rank: 0\n"), "{text}");
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(export).unwrap()).unwrap();
    assert_eq!(doc["rows"][0]["rank"], 0);
    assert_eq!(doc["rows"][0]["action"], "x@sys");
}

#[test]
fn simulate_writes_trace_stats_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), LOOP, "GF p");
    let (trace, stats, series) = (dir.path().join("t.jsonl"), dir.path().join("s.json"), dir.path().join("b.txt"));
    let out = bin(&[
        "simulate", p(&m), p(&s), "--steps", "50", "--seed", "4", "--trace", p(&trace), "--stats", p(&stats), "--series", p(&series),
        "--belief-full", "--latency",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let events: Vec<Value> = std::fs::read_to_string(&trace).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(events.len(), 50);
    assert_eq!(events[0]["step"], 1);
    assert!(events.iter().all(|e| e["belief"].is_array() && e["belief_size"] == 1));
    assert!(events.iter().filter(|e| e["actor"] == "System").all(|e| e["latency_us"].is_number()));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(stats).unwrap()).unwrap();
    assert_eq!(doc["termination"]["kind"], "max_steps");
    assert_eq!(doc["stats"]["steps"], 50);
    let rows: Vec<String> = std::fs::read_to_string(series).unwrap().lines().map(String::from).collect();
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[0], "0 1");
}

#[test]
fn scripted_environment() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), LOOP, "GF p");
    let script = dir.path().join("env.txt");
    std::fs::write(&script, "r\nl@env\n").unwrap();
    let trace = dir.path().join("t.jsonl");
    let env = format!("scripted:{}", p(&script));
    let out = bin(&["simulate", p(&m), p(&s), "--steps", "8", "--env", &env, "--trace", p(&trace)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let env_moves: Vec<String> = std::fs::read_to_string(&trace)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap())
        .filter(|e| e["actor"] == "Environment")
        .map(|e| e["action"].as_str().unwrap().to_string())
        .collect();
    assert_eq!(env_moves, ["r@env", "l@env", "r@env", "l@env"]);

    std::fs::write(&script, "stay\n").unwrap();
    let out = bin(&["simulate", p(&m), p(&s), "--steps", "8", "--env", &env]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn run_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), "ap p\nstate a sys {}\ninit a\ntrans a x@sys a\n", "GF p");
    assert_eq!(bin(&["simulate", p(&m), p(&s)]).status.code(), Some(3));

    // Without the sensor the hidden bit cannot be resolved.
    let blind: String = HIDDEN.lines().filter(|l| !l.starts_with("sense")).map(|l| format!("{l}\n")).collect();
    let (m, s) = files(dir.path(), &blind, "GF p");
    let out = bin(&["simulate", p(&m), p(&s), "--steps", "20"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dead end"));

    let (m, s) = files(dir.path(), HIDDEN, "GF p");
    assert!(bin(&["simulate", p(&m), p(&s), "--steps", "20"]).status.success());
    assert_eq!(bin(&["simulate", p(&m), p(&s), "--steps", "20", "--budget", "0"]).status.code(), Some(3));
}

#[test]
fn export_brt_from_a_belief_file() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), HIDDEN, "GF p");
    let belief = dir.path().join("belief.txt");
    std::fs::write(&belief, "s0|wait0 s1|wait0\n").unwrap();
    let out = bin(&["export-brt", p(&m), p(&s), "--belief", p(&belief)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["root_rank"], 1);
    assert_eq!(doc["depth"], 1);
    let nodes = doc["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 3);
    assert_eq!(nodes[0]["choice"], "bit0: b0");
    assert_eq!(nodes[1]["leaf"], "ProgressDefined");

    std::fs::write(&belief, "nowhere\n").unwrap();
    assert_eq!(bin(&["export-brt", p(&m), p(&s), "--belief", p(&belief)]).status.code(), Some(2));
}

#[test]
fn sweep_and_bench_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let (m, s) = files(dir.path(), HIDDEN, "GF p");
    let out = bin(&["sweep", p(&m), p(&s), "--steps", "100", "--seeds", "4", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["summary"]["runs"], 4);
    assert_eq!(doc["runs"].as_array().unwrap().len(), 4);
    assert!(doc["summary"]["f_visits_min"].as_u64().unwrap() > 0);

    let emit = dir.path().join("wumpus");
    let out = bin(&["bench-wumpus", "--steps", "30", "--seeds", "2", "--emit", p(&emit)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("max_belief_size: 43"), "{text}");
    assert!(text.contains("note: assumed wumpus policy"), "{text}");
    let out = bin(&["solve", p(&emit.join("wumpus.model")), p(&emit.join("wumpus.spec"))]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("states: 16383"));
}
