use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qresource"))
}

fn data(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Parses CSV output into a header and rows of string fields.
fn csv(o: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    assert!(o.status.success(), "run failed: {}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(o);
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().expect("header row").split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn quality_factor_of_amplitude_damping() {
    let (h, rows) = csv(&run(&["--experiment", "quality_factors", "--gamma", "0.25"]));
    let (ch, q) = (col(&h, "channel"), col(&h, "Q"));
    let row = rows.iter().find(|r| r[ch] == "amplitude_damping").unwrap();
    let q: f64 = row[q].parse().unwrap();
    assert!((q - 0.75f64.sqrt()).abs() < 1e-9);
}

#[test]
fn two_party_two_copy_optimum() {
    let (h, rows) =
        csv(&run(&["--experiment", "table5_2", "--parties", "2", "--restarts", "50", "--seed", "7"]));
    assert_eq!(&h[..7], ["N", "functional", "value", "bound", "restarts", "seed", "wall_time_s"]);
    assert_eq!(rows.len(), 1);
    let v: f64 = rows[0][col(&h, "value")].parse().unwrap();
    assert!((2.413..=2.4143).contains(&v), "value {v}");
    assert_eq!(rows[0][col(&h, "seed")], "7");
    assert_eq!(rows[0][col(&h, "restarts")], "50");
}

#[test]
fn capacity_gap_grid() {
    let (h, rows) = csv(&run(&["--experiment", "fig6_5"]));
    assert_eq!(&h[..5], ["mu", "F_q", "F_c", "discord_gap", "concurrence"]);
    assert_eq!(rows.len(), 21);
    let (mu, gap, conc) = (col(&h, "mu"), col(&h, "discord_gap"), col(&h, "concurrence"));
    let at = |x: &str| rows.iter().find(|r| r[mu] == x).unwrap();
    assert_eq!(at("0.3")[conc].parse::<f64>().unwrap(), 0.0);
    assert!(at("0.3")[gap].parse::<f64>().unwrap() > 0.0);

    let (h, rows) = csv(&run(&["--experiment", "fig6_5", "--mu", "0.3333333333333333"]));
    let c: f64 = rows[0][col(&h, "concurrence")].parse().unwrap();
    let g: f64 = rows[0][col(&h, "discord_gap")].parse().unwrap();
    assert!(c.abs() < 1e-12 && g > 0.1, "concurrence {c}, gap {g}");
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["--experiment", "table5_2", "--parties", "2,3", "--restarts", "6", "--seed", "3", "--omit-timing"];
    let a = run(&args);
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "2"]);
    let b = run(&with_threads);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("wall_time_s"));

    let f1 = run(&["--experiment", "fig6_5", "--mu", "0.2,0.7", "--format", "json", "--omit-timing"]);
    let f2 = run(&["--experiment", "fig6_5", "--mu", "0.2,0.7", "--format", "json", "--omit-timing"]);
    assert_eq!(f1.stdout, f2.stdout);
}

#[test]
fn json_record_echoes_config() {
    let o = run(&["--experiment", "table5_1_check", "--seed", "5", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["experiment"], "table5_1_check");
    assert_eq!(v["config"]["seed"], 5);
    assert!(v["wall_time_s"].as_f64().is_some());
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r["max_deviation"].as_f64().unwrap() < 1e-12);
    }
    // only the (1,1) row carries the printed-variant comparison
    assert!(rows[4]["printed_max_deviation"].as_f64().unwrap() > 1e-3);
    assert!(rows[0]["printed_max_deviation"].is_null());
}

#[test]
fn unknown_experiment_is_rejected_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let o = run(&["--experiment", "table9_9", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn output_file_is_written_whole() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = run(&["--experiment", "quality_factors", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&out).unwrap();
    assert_eq!(written, run(&["--experiment", "quality_factors"]).stdout);
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1, "temporary files left behind: {names:?}");
}

#[test]
fn validate_reports_each_invariant() {
    let o = run(&["validate", data("states/bell_phi_plus.json").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().skip(1).all(|l| l.contains(",true,")));

    let o = run(&["validate", data("states/trace_09.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("trace,false"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trace invariant failed"));

    let o = run(&["validate", data("channels/not_trace_preserving.json").to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let check = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "trace_preserving").unwrap();
    assert_eq!(check["passed"], false);
    assert!(check["detail"].as_str().unwrap().contains("Σ K†K"));

    assert_eq!(run(&["validate", "/nonexistent/state.json"]).status.code(), Some(1));
}

#[test]
fn state_and_channel_files_drive_experiments() {
    let (h, rows) = csv(&run(&[
        "--experiment",
        "discord",
        "--state",
        data("states/bell_phi_plus.json").to_str().unwrap(),
    ]));
    let d: f64 = rows[0][col(&h, "discord")].parse().unwrap();
    assert!((d - 1.0).abs() < 1e-6);

    let (h, rows) = csv(&run(&[
        "--experiment",
        "quantumness",
        "--channel",
        data("channels/streltsov.json").to_str().unwrap(),
        "--restarts",
        "8",
    ]));
    let w: f64 = rows[0][col(&h, "W")].parse().unwrap();
    assert!((w - 1.0).abs() < 1e-6, "W = {w}");

    let (h, rows) = csv(&run(&["--experiment", "quantumness", "--channel", data("channels/hadamard.json").to_str().unwrap()]));
    assert_eq!(rows[0][col(&h, "W")], "inf");
    assert_eq!(rows[0][col(&h, "infinite")], "true");
}

#[test]
fn inputs_outside_an_experiments_domain_exit_with_validation_code() {
    let cases: [&[&str]; 5] = [
        &["--experiment", "nogo_check", "--state", "ghz-dualrail", "--parties", "3"],
        &["--experiment", "discord", "--state", "/nonexistent.json"],
        &["--experiment", "quantumness", "--channel", "/nonexistent.json"],
        &["--experiment", "bell_optimize", "--state", "w", "--copies", "1"],
        &["--experiment", "quality_factors", "--gamma", "1.5"],
    ];
    for args in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
    }
    let o = run(&["--experiment", "nogo_check", "--state", "ghz-dualrail", "--parties", "3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("inapplicable"));
}

#[test]
fn no_go_blocks_for_two_copies_of_w3() {
    let (h, rows) = csv(&run(&["--experiment", "nogo_check", "--state", "w", "--parties", "3"]));
    assert_eq!(rows.len(), 6);
    let empty = col(&h, "empty_parties");
    assert!(rows.iter().all(|r| !r[empty].is_empty()));
}

#[test]
fn crossing_is_reported_in_json_summary() {
    let o = run(&["--experiment", "fig6_2", "--mu", "0.6,0.7", "--restarts", "8", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let c = v["summary"]["crossing_mu"].as_f64().unwrap();
    assert!((0.6..0.7).contains(&c));
    let rows = v["rows"].as_array().unwrap();
    assert!(rows[0]["generating_power"].as_f64() > rows[0]["distinguishing_power"].as_f64());
    assert!(rows[1]["generating_power"].as_f64() < rows[1]["distinguishing_power"].as_f64());
}
