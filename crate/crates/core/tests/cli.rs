use std::path::Path;
use std::process::{Command, Output};

fn icon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icon")).args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn simulate_is_byte_identical_for_a_fixed_seed() {
    let args = ["simulate", "--n", "200", "--horizon", "5", "--replicas", "2", "--seed", "17"];
    let runs: Vec<Output> = (0..2).map(|_| icon(&args)).collect();
    assert!(runs[0].status.success(), "{}", String::from_utf8_lossy(&runs[0].stderr));
    assert_eq!(runs[0].stdout, runs[1].stdout);
    let first = String::from_utf8(runs[0].stdout.clone()).unwrap();
    assert!(first.lines().next().unwrap().starts_with("# icon-core "));
    assert!(first.contains("# seed: 17"));
    assert!(first.contains("measured_mean_degree="));
    assert!(first.contains("\nreplica,time,prevalence,mean_degree\n"));
    let rows = first.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 2 * 500);
}

#[test]
fn events_replay_to_recorded_counts() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let events = dir.path().join("events.csv");
    let out = icon(&[
        "simulate", "--n", "100", "--horizon", "3", "--replicas", "1", "--algorithm", "fast",
        "--out", traj.to_str().unwrap(), "--events-out", events.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = read(&events);
    assert!(text.contains("\nreplica,time,kind,node_a,node_b\n"));
    let recoveries = text.lines().filter(|l| l.contains(",recovery,")).count() as i64;
    let infections = text.lines().filter(|l| l.contains(",transmission,")).count() as i64;
    let rows: Vec<Vec<f64>> = read(&traj)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("replica"))
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let delta = ((last[2] - first[2]) * 100.0).round() as i64;
    assert_eq!(delta, infections - recoveries);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"n": 80, "replicas": 4, "seed": 3, "b": 0.5}"#).unwrap();
    let out = icon(&["simulate", "--config", cfg.to_str().unwrap(), "--replicas", "1", "--print-config"]);
    assert!(out.status.success());
    let printed = String::from_utf8(out.stdout).unwrap();
    assert!(printed.contains("\"n\": 80"));
    assert!(printed.contains("\"replicas\": 1"));
    assert!(printed.contains("\"b\": 0.5"));
}

#[test]
fn bad_input_exits_nonzero() {
    assert!(!icon(&["frobnicate"]).status.success());
    let empty = icon(&["sweep", "--n", "50", "--replicas", "1"]);
    assert!(!empty.status.success());
    assert!(String::from_utf8_lossy(&empty.stderr).contains("triple"));
    assert!(!icon(&["simulate", "--graph", "lattice"]).status.success());
    assert!(!icon(&["simulate", "--n", "20", "--alpha", "-1"]).status.success());
    assert!(!icon(&["simulate", "--config", "/nonexistent/cfg.json"]).status.success());
}

#[test]
fn sweep_writes_summary_and_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let traj_dir = dir.path().join("traj");
    let out = icon(&[
        "sweep", "--n", "150", "--horizon", "4", "--replicas", "2", "--grid", "50",
        "--triple", "3,2,2", "--triple", "1.5,0,0",
        "--traj-dir", traj_dir.to_str().unwrap(), "--out", summary.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&summary);
    assert!(text.contains("\nbeta_prime,a_prime,b,replica,wave_count\n"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 4);
    assert_eq!(std::fs::read_dir(&traj_dir).unwrap().count(), 2);
}

#[test]
fn gen_graph_output_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.txt");
    let states = dir.path().join("s.txt");
    let out = icon(&[
        "gen-graph", "--graph", "ba", "--n", "60", "--m", "3",
        "--out", graph.to_str().unwrap(), "--states-out", states.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // seed clique of 3 edges plus 3 per remaining node
    let edge_lines = read(&graph).lines().filter(|l| !l.starts_with('#') && !l.starts_with("n=")).count();
    assert_eq!(edge_lines, 3 + 57 * 3);
    assert_eq!(read(&states).lines().filter(|l| l.ends_with(" I")).count(), 6);
    let sim = icon(&[
        "simulate", "--graph-file", graph.to_str().unwrap(), "--states-file", states.to_str().unwrap(),
        "--horizon", "1", "--replicas", "1", "--grid", "2",
    ]);
    assert!(sim.status.success(), "{}", String::from_utf8_lossy(&sim.stderr));
    let stdout = String::from_utf8(sim.stdout).unwrap();
    assert!(stdout.contains("\n0,0,0.1,"));
}

#[test]
fn oracle_check_passes_for_three_nodes() {
    let out = icon(&["oracle-check", "--n", "3", "--replicas", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.matches("PASS").count(), 3);
}

#[test]
fn bench_emits_rows_and_skip_markers() {
    let out = icon(&["bench", "--graphs", "er", "--sizes", "100,2000", "--runs", "2", "--horizon", "0.5", "--naive-max-nodes", "1000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 3 * 2 * 2);
    assert!(rows.iter().any(|r| r.starts_with("naive,er,2000,") && r.ends_with(",size_limit")));
    assert!(rows.iter().filter(|r| r.starts_with("icon,")).all(|r| r.ends_with(',')));
}
