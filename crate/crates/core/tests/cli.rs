use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fput_core::experiment::{load_records, ExperimentConfig, RUN_RECORD_HEADER};

const SMALL: &str = r#"
N = [16, 24]
betaN_values = [0.5, 0.05]
init = ["thermal", "out-of-equilibrium"]
t_max_in_Tf = 2.0
window_in_Tf = [1.0, 2.0]
n_ensembles = 2
sample_cadence = 10
base_seed = 99
"#;

fn fput(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fput"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sweep_writes_reproducible_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("small.toml");
    fs::write(&config, SMALL).unwrap();
    let out_dir = tmp.path().join("run");
    let config = config.to_str().unwrap();

    ok(&fput(&out_dir, &["ratio-sweep", "--config", config, "--threads", "1"]));
    let csv = fs::read(out_dir.join("ratio_sweep.csv")).unwrap();
    let header = String::from_utf8_lossy(&csv).lines().next().unwrap().to_owned();
    assert_eq!(header, RUN_RECORD_HEADER.join(","));
    let records = load_records(&out_dir.join("ratio_sweep.csv")).unwrap();
    assert_eq!(records.len(), 8);
    assert!(records.iter().all(|r| r.valid && r.seed == 99));
    assert!(out_dir.join("ratio_sweep.svg").exists());
    assert!(out_dir.join("timings.csv").exists());
    let saved = ExperimentConfig::load(&out_dir.join("config.toml")).unwrap();
    assert_eq!(saved, ExperimentConfig::from_toml_str(SMALL).unwrap());

    // Existing outputs are protected unless --force is given.
    let refused = fput(&out_dir, &["ratio-sweep", "--config", config]);
    assert!(!refused.status.success());
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--force"));
    ok(&fput(&out_dir, &["ratio-sweep", "--config", config, "--force"]));
    assert_eq!(fs::read(out_dir.join("ratio_sweep.csv")).unwrap(), csv);

    // A different seed changes the numbers.
    let other = tmp.path().join("other");
    ok(&fput(&other, &["ratio-sweep", "--config", config, "--seed", "100"]));
    assert_ne!(fs::read(other.join("ratio_sweep.csv")).unwrap(), csv);

    // CLI grid flags override the file.
    let narrow = tmp.path().join("narrow");
    ok(&fput(&narrow, &["ratio-sweep", "--config", config, "--n", "16", "--beta-n", "0.5", "--no-plot"]));
    assert_eq!(load_records(&narrow.join("ratio_sweep.csv")).unwrap().len(), 2);
    assert!(!narrow.join("ratio_sweep.svg").exists());

    let plots = tmp.path().join("plots");
    let input = out_dir.join("ratio_sweep.csv");
    ok(&fput(&plots, &["plot", "--input", input.to_str().unwrap()]));
    let svg = fs::read_to_string(plots.join("ratio_sweep.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="series""#).count(), 2);
}

#[test]
fn simulate_writes_a_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("small.toml");
    fs::write(&config, SMALL).unwrap();
    let out = fput(
        tmp.path(),
        &["simulate", "--config", config.to_str().unwrap(), "--n", "16", "--beta-n", "1", "--init", "out-of-equilibrium"],
    );
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("r="));
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next().unwrap(), "t,S1,S2,S3,H");
    // Two fundamental periods of N = 16 at h = 0.01, one sample every 10 steps, plus t = 0.
    assert!(lines.count() > 300);
}

#[test]
fn checks_and_scans_run() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&fput(tmp.path(), &["scan-bound", "--n", "16,32"]));
    let scan = fs::read_to_string(tmp.path().join("scan_bound.csv")).unwrap();
    assert_eq!(scan.lines().count(), 3);
    assert!(scan.starts_with("N,k1,sumB1,sumB2,sumB3,total,normalized"));

    ok(&fput(tmp.path(), &["scan-bound", "--n", "12", "--all-k1", "--force"]));
    assert_eq!(fs::read_to_string(tmp.path().join("scan_bound.csv")).unwrap().lines().count(), 12);

    ok(&fput(tmp.path(), &["wick-check", "--n", "12", "--k1", "6", "--samples", "4000"]));
    assert_eq!(fs::read_to_string(tmp.path().join("wick_check.csv")).unwrap().lines().count(), 3);

    ok(&fput(tmp.path(), &["transform-check", "--n", "16", "--samples", "4"]));
    assert_eq!(fs::read_to_string(tmp.path().join("transform_check.csv")).unwrap().lines().count(), 13);
}

#[test]
fn bad_input_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("bad.toml");
    fs::write(&config, "N = 2\n").unwrap();
    let out = fput(tmp.path(), &["ratio-sweep", "--config", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least"));

    let out = fput(tmp.path(), &["plot", "--input", "/nonexistent/results.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/results.csv"));
}
