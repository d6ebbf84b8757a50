//! End-to-end checks of the `cachecalc` binary: flag handling, file
//! emission, config precedence, and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};
use std::sync::atomic::{AtomicU32, Ordering};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cachecalc"))
}

static COUNTER: AtomicU32 = AtomicU32::new(0);

fn temp_path(name: &str) -> PathBuf {
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    std::env::temp_dir().join(format!("cachecalc-cli-{}-{n}-{name}", std::process::id()))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn exact_writes_expected_csv() {
    let out = temp_path("exact.csv");
    let output = run(&[
        "exact",
        "-K",
        "2",
        "-L",
        "2",
        "--t",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("k,lambda,t,gamma,"));
    let row = lines.next().unwrap();
    assert!(row.starts_with("2,2,1,0.5,"), "{row}");
    assert!(row.contains("0.75"), "{row}");
    assert!(row.contains("1.5"), "{row}");
    std::fs::remove_file(out).ok();
}

#[test]
fn exact_stdout_when_no_out() {
    let output = run(&["exact", "-K", "2", "-L", "2", "--t", "1,2"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn budget_error_keeps_running_and_fails_exit_code() {
    let output = run(&[
        "exact", "-K", "50,2", "-L", "10", "--t", "1", "--budget", "100",
    ]);
    assert!(!output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    // the K=50 row carries the error, the K=2 row still computed
    assert_eq!(text.lines().count(), 3);
    assert!(text.contains("budget"));
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("2,10,1,0.1,"), "{last}");
    assert!(!last.contains("budget"));
}

#[test]
fn invalid_spec_is_rejected_with_field_name() {
    let output = run(&["exact", "-K", "4", "-L", "2", "--t", "3"]);
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("--t"), "{err}");

    let output = run(&["simulate", "-K", "4", "-L", "2", "--t", "1"]);
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("--seed"), "{err}");

    let output = run(&["bounds", "-K", "4", "-L", "1", "--t", "1"]);
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("--caches"), "{err}");
}

#[test]
fn bounds_emits_threshold_and_nonuniform_columns() {
    let output = run(&[
        "bounds", "-K", "16", "-L", "8", "--t", "2", "--rho", "0.9", "--alpha", "1.0",
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    for name in ["aub", "alb", "nlb", "nub", "naub", "nalb", "rho_achieved"] {
        assert!(!col(name).is_empty(), "column {name} empty");
    }
    // unused metrics stay null (empty cells), never zero
    for name in ["exact", "sbn_mean", "paub", "error"] {
        assert!(col(name).is_empty(), "column {name} not empty");
    }
}

#[test]
fn simulate_json_round_trips() {
    let out = temp_path("sim.json");
    let output = run(&[
        "simulate",
        "-K",
        "8",
        "-L",
        "4",
        "--t",
        "1",
        "--samples",
        "2000",
        "--seed",
        "7",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{output:?}");
    let file = std::fs::File::open(&out).unwrap();
    let rows = cachecalc::cli::parse_json_rows(file).unwrap();
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(row.seed, Some(7));
    assert_eq!(row.samples, Some(2000));
    assert!(row.sbn_mean.is_some());
    assert!(row.runtime_ms.is_none());
    // metadata object is first and carries the seed
    let text = std::fs::read_to_string(&out).unwrap();
    let items: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    assert_eq!(items[0]["tool"], "cachecalc");
    assert_eq!(items[0]["seed"], 7);
    assert!(items[0]["generated_at"].is_string());
    std::fs::remove_file(out).ok();
}

#[test]
fn config_file_fills_defaults_and_flags_override() {
    let config = temp_path("config.json");
    std::fs::write(
        &config,
        r#"{"users": [4], "caches": [2], "t": [1], "samples": 500, "seed": 3}"#,
    )
    .unwrap();
    // config alone
    let output = bin()
        .args(["simulate", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("4,2,1,"), "{row}");
    assert!(row.contains(",500,"), "{row}");

    // flag overrides the config's user grid
    let output = bin()
        .args(["simulate", "-K", "6", "--config", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("6,2,1,"));
    std::fs::remove_file(config).ok();
}

#[test]
fn probe_scaling_emits_normalizers() {
    let output = run(&[
        "probe-scaling",
        "-L",
        "16,32",
        "--regime",
        "quadratic",
        "--samples",
        "100",
        "--seed",
        "5",
    ]);
    assert!(output.status.success(), "{output:?}");
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let col = |name: &str| row[header.iter().position(|h| *h == name).unwrap()];
    assert_eq!(col("k"), "256");
    assert_eq!(col("normalizer"), "1");
    assert!(!col("g").is_empty());
}

#[test]
fn figure_two_and_three_run_quickly() {
    let output = run(&["figure", "3"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.lines().count() > 10);

    let out = temp_path("fig2.csv");
    let output = run(&["figure", "2", "--out", out.to_str().unwrap()]);
    assert!(output.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 57); // header + 8 profiles x 7 t values
    std::fs::remove_file(out).ok();
}

#[test]
fn bundled_figures_run_end_to_end() {
    // light figures at reduced sample counts; figure 4's heavy enumeration
    // is exercised by the acceptance suite
    for id in ["5", "6", "7", "9", "10"] {
        let out = temp_path(&format!("fig{id}.csv"));
        let output = run(&[
            "figure",
            id,
            "--samples",
            "1000",
            "--seed",
            "12",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "figure {id}: {output:?}");
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.lines().count() > 1, "figure {id} emitted no rows");
        let header = text.lines().next().unwrap();
        assert!(header.starts_with("k,lambda,t,"), "figure {id}");
        std::fs::remove_file(out).ok();
    }
}

#[test]
fn zero_redundancy_rows_carry_a_warning() {
    let output = run(&["exact", "-K", "4", "-L", "2", "--t", "0"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("no coded gain"), "{text}");
}

#[test]
fn unwritable_path_reports_path_and_cause() {
    let output = run(&[
        "exact",
        "-K",
        "2",
        "-L",
        "2",
        "--t",
        "1",
        "--out",
        "/nonexistent-dir/x.csv",
    ]);
    assert!(!output.status.success());
    let err = String::from_utf8(output.stderr).unwrap();
    assert!(err.contains("/nonexistent-dir/x.csv"), "{err}");
}

#[test]
fn gamma_flag_matches_t_flag() {
    let strip_runtime = |bytes: Vec<u8>| {
        let text = String::from_utf8(bytes).unwrap();
        let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
        let runtime_idx = header.iter().position(|h| *h == "runtime_ms").unwrap();
        text.lines()
            .map(|line| {
                let mut cells: Vec<&str> = line.split(',').collect();
                cells[runtime_idx] = "";
                cells.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let via_t = run(&["exact", "-K", "8", "-L", "4", "--t", "1"]);
    let via_gamma = run(&["exact", "-K", "8", "-L", "4", "--gamma", "0.25"]);
    assert!(via_t.status.success() && via_gamma.status.success());
    assert_eq!(strip_runtime(via_t.stdout), strip_runtime(via_gamma.stdout));

    let bad = run(&["exact", "-K", "8", "-L", "4", "--gamma", "0.3"]);
    assert!(!bad.status.success());
}
