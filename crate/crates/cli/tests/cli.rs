//! End-to-end tests of the `chaintrends` binary: exit codes, stream
//! discipline and file handling.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaintrends"))
        .args(args)
        .output()
        .expect("spawning chaintrends")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = run(&["aggregate", "--frobnicate", "x"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = run(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("aggregate"));
}

#[test]
fn aggregate_expands_globs_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("monthly.csv");
    let pattern = format!("{}/*.csv", fixture("tx").display());
    let out = run(&[
        "aggregate",
        "--input",
        &pattern,
        "--workers",
        "4",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.starts_with("month,tx_count,contract_count,mean_gas,mean_gas_price_gwei\n"));
    assert!(csv.lines().count() > 1);
    // Diagnostics go to stderr, data to the file.
    assert!(out.stdout.is_empty());
    assert!(stderr(&out).contains("aggregated"));
}

#[test]
fn aggregate_missing_file_is_a_data_error() {
    let out = run(&["aggregate", "--input", "/nonexistent/shard.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/shard.csv"));
}

#[test]
fn stitch_without_overlap_names_the_pair() {
    let dir = tempfile::tempdir().unwrap();
    let trends = dir.path().join("disjoint.csv");
    std::fs::write(
        &trends,
        "window_id,date,value\n\
         early,2020-01-01,100\nearly,2020-01-02,50\n\
         late,2020-06-01,100\nlate,2020-06-02,50\n",
    )
    .unwrap();
    let out = run(&["stitch", "--input", trends.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("early") && msg.contains("late"), "{msg}");
}

#[test]
fn stitch_writes_max_100_series() {
    let out = run(&["stitch", "--input", fixture("trends.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.starts_with("date,value\n"));
    let max = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((max - 100.0).abs() < 1e-9);
}

#[test]
fn returns_then_describe_compose() {
    let dir = tempfile::tempdir().unwrap();
    let ret_path = dir.path().join("eth_ret.csv");
    let out = run(&[
        "returns",
        "--input",
        fixture("eth.csv").to_str().unwrap(),
        "--out",
        ret_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));

    let out = run(&["describe", "--input", ret_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = String::from_utf8_lossy(&out.stdout);
    assert!(csv.starts_with("stat,eth_ret\nmean,"));
    assert_eq!(csv.lines().count(), 8);
}

#[test]
fn xcorr_matrix_writes_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let matrix = dir.path().join("matrix.csv");
    let lags = dir.path().join("lags.csv");
    let inputs = format!(
        "{},{}",
        fixture("eth.csv").display(),
        fixture("btc.csv").display()
    );
    let out = run(&[
        "xcorr",
        "--inputs",
        &inputs,
        "--max-lag",
        "60",
        "--out",
        matrix.to_str().unwrap(),
        "--lags-out",
        lags.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let matrix_csv = std::fs::read_to_string(&matrix).unwrap();
    let lags_csv = std::fs::read_to_string(&lags).unwrap();
    assert!(matrix_csv.starts_with(",eth,btc\n"));
    assert!(lags_csv.starts_with(",eth,btc\n"));
}

#[test]
fn xcorr_curve_rejects_lags_out() {
    let inputs = format!(
        "{},{}",
        fixture("eth.csv").display(),
        fixture("btc.csv").display()
    );
    let out = run(&[
        "xcorr", "--inputs", &inputs, "--kind", "curve", "--lags-out", "/tmp/x.csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn render_lines_svg_to_stdout() {
    let inputs = format!(
        "{},{}",
        fixture("gts_eth.csv").display(),
        fixture("gts_btc.csv").display()
    );
    let out = run(&["render", "--kind", "lines", "--inputs", &inputs, "--title", "t"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let svg = String::from_utf8_lossy(&out.stdout);
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn render_heatmap_needs_input() {
    let out = run(&["render", "--kind", "heatmap"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--input"));
}

#[test]
fn workers_zero_is_a_usage_error() {
    let out = run(&["aggregate", "--input", "x.csv", "--workers", "0"]);
    assert_eq!(out.status.code(), Some(1));
}
