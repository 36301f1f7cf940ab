//! CLI surface tests: flags, exit codes, the env-var override, and the
//! file-listing contract.

mod common;

use std::process::Command;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_market-recon"));
    cmd.env_remove("MARKET_RECON_OUT");
    cmd
}

fn write_fixture(dir: &std::path::Path, rows: usize) -> String {
    let path = dir.join("prices.csv");
    std::fs::write(&path, common::synthetic_daily_csv(rows, 5)).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn argument_errors_exit_with_code_two() {
    let out = bin().arg("montecarlo").output().unwrap(); // missing --input
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["montecarlo", "--input", "x.csv", "--symbols", "4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "even alphabet must be refused");

    let out = bin()
        .args(["ksweep", "--input", "x.csv", "--k-range", "5..2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "inverted range must be refused");
}

#[test]
fn pipeline_errors_exit_with_code_one_and_a_single_line() {
    let work = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["montecarlo", "--input", "/nonexistent/prices.csv"])
        .arg("--output-dir")
        .arg(work.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert_eq!(stderr.trim_end().lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.starts_with("error:"));

    // A malformed file is a pipeline error too.
    let bad = work.path().join("bad.csv");
    std::fs::write(&bad, "Date,Open\n2020-01-01,1\n").unwrap();
    let out = bin()
        .args(["stats", "--input", bad.to_str().unwrap()])
        .arg("--output-dir")
        .arg(work.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn every_written_file_is_listed_on_stdout() {
    let work = tempfile::tempdir().unwrap();
    let input = write_fixture(work.path(), 300);
    let out_dir = work.path().join("out");
    let out = bin()
        .args(["montecarlo", "--input", &input, "--sims", "3", "--seed", "1"])
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    let listed: Vec<&str> = stdout.lines().collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(&out_dir)
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    on_disk.sort();
    let mut listed_sorted: Vec<String> = listed.iter().map(|s| s.to_string()).collect();
    listed_sorted.sort();
    assert_eq!(listed_sorted, on_disk);
}

#[test]
fn input_file_is_never_mutated() {
    let work = tempfile::tempdir().unwrap();
    let input = write_fixture(work.path(), 200);
    let before = std::fs::read(&input).unwrap();
    let out = bin()
        .args(["encode", "--input", &input])
        .arg("--output-dir")
        .arg(work.path().join("enc"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(std::fs::read(&input).unwrap(), before);
}

#[test]
fn env_var_overrides_the_output_dir_flag() {
    let work = tempfile::tempdir().unwrap();
    let input = write_fixture(work.path(), 200);
    let flag_dir = work.path().join("from_flag");
    let env_dir = work.path().join("from_env");
    let out = bin()
        .args(["randomwalk", "--seed", "2"])
        .arg("--output-dir")
        .arg(&flag_dir)
        .env("MARKET_RECON_OUT", &env_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(env_dir.join("fig1a_walk_50.csv").exists());
    assert!(!flag_dir.exists());

    // Without the env var the flag wins.
    let out = bin()
        .args(["reconstruct", "--input", &input, "--seed", "2"])
        .arg("--output-dir")
        .arg(&flag_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(flag_dir.join("fig12_reconstruction.csv").exists());
}

#[test]
fn skipped_rows_produce_a_warning() {
    let work = tempfile::tempdir().unwrap();
    let mut csv = common::synthetic_daily_csv(120, 5);
    csv.push_str("2031-01-07,null,null,null,null,null,null\n");
    let input = work.path().join("gappy.csv");
    std::fs::write(&input, csv).unwrap();
    let out = bin()
        .args(["encode", "--input", input.to_str().unwrap()])
        .arg("--output-dir")
        .arg(work.path().join("out"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("skipped 1 row"), "stderr: {stderr}");
}

#[test]
fn montecarlo_on_daily_data_orders_the_errors() {
    let work = tempfile::tempdir().unwrap();
    let input = write_fixture(work.path(), 2600);
    let out_dir = work.path().join("mc");
    let out = bin()
        .args([
            "montecarlo", "--input", &input, "--symbols", "3", "--order", "1", "--sims", "500",
            "--seed", "7",
        ])
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("montecarlo.json")).unwrap())
            .unwrap();
    let markov = report["mean_markov_error"].as_f64().unwrap();
    let baseline = report["mean_baseline_error"].as_f64().unwrap();
    assert!(markov < baseline, "markov {markov} baseline {baseline}");
    assert_eq!(report["per_run"].as_array().unwrap().len(), 500);
}

#[test]
fn ksweep_emits_one_row_per_k() {
    let work = tempfile::tempdir().unwrap();
    let input = write_fixture(work.path(), 400);
    let out_dir = work.path().join("sweep");
    let out = bin()
        .args([
            "ksweep", "--input", &input, "--symbols", "5", "--k-range", "2..8", "--sims", "2",
            "--seed", "1",
        ])
        .arg("--output-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = std::fs::read_to_string(out_dir.join("fig14_ksweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 8); // header + 7 rows
    let ks: Vec<&str> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(ks, ["2", "3", "4", "5", "6", "7", "8"]);
}
