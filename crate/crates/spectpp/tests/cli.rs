//! End-to-end runs of the `spectpp` binary: the generate/sample/report
//! pipeline, flag plumbing, exit codes, and byte-level determinism.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spectpp"))
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn generate_sample_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let data_dir = dir.path().join("data");
    let run_dir = dir.path().join("run");

    let status = bin()
        .args([
            "generate",
            "--model",
            "hawkes",
            "--dim",
            "3",
            "--sparsity",
            "0.4",
        ])
        .args([
            "--a-max",
            "0.3",
            "--n-sequences",
            "2",
            "--t-end",
            "40",
            "--seed",
            "5",
        ])
        .arg("--out")
        .arg(&data_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(data_dir.join("data.jsonl").exists());
    let params = read(&data_dir.join("model.json"));
    assert!(params.contains("\"model\": \"hawkes\""));

    let status = bin()
        .args(["sample", "--model", "hawkes"])
        .arg("--params")
        .arg(data_dir.join("model.json"))
        .arg("--data")
        .arg(data_dir.join("data.jsonl"))
        .args(["--n-histories", "2", "--n-samples", "6", "--n-events", "30"])
        .args([
            "--mode", "both", "--step", "5", "--top-k", "1", "--seed", "9",
        ])
        .arg("--out")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(run_dir.join("autoregressive.jsonl").exists());
    assert!(run_dir.join("speculative.jsonl").exists());
    let stats = read(&run_dir.join("stats.json"));
    assert!(stats.contains("avg_step"));
    assert!(stats.contains("timings_ms"));

    let status = bin()
        .arg("report")
        .arg("--dir")
        .arg(&run_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = read(&run_dir.join("metrics.csv"));
    assert!(csv.starts_with("metric,variant,mean,std"));
    assert!(csv.contains("mmd,true"));
    assert!(csv.contains("step,top1"));
    assert!(read(&run_dir.join("timings.csv")).contains("rejection_const_ms"));
}

#[test]
fn fixed_seed_repeats_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let status = bin()
            .args([
                "generate",
                "--model",
                "jump",
                "--n-sequences",
                "2",
                "--seed",
                "3",
            ])
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("data.jsonl")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn sweep_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args([
            "sweep",
            "--dims",
            "3,5",
            "--sparsities",
            "0.2,0.8",
            "--a-maxes",
            "0.1",
        ])
        .args(["--decays", "1.0", "--n-seeds", "2", "--warmup-events", "10"])
        .args(["--n-events", "30", "--step", "5", "--seed", "2"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let raw = read(&dir.path().join("sweep.csv"));
    assert_eq!(raw.lines().count(), 9, "header plus 8 rows");
    let agg = read(&dir.path().join("sweep_agg.csv"));
    assert!(agg.starts_with("dim,sparsity,a_max,decay,avg_step_mean"));
}

#[test]
fn exit_codes() {
    // Config error: invalid delta.
    let status = bin()
        .args([
            "sample",
            "--model",
            "renewal",
            "--delta",
            "1.5",
            "--n-events",
            "5",
        ])
        .arg("--out")
        .arg(tempfile::tempdir().unwrap().path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    // Config error: missing report inputs, names the path.
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .arg("report")
        .arg("--dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest.json"));
}

#[test]
fn autoregressive_mode_has_no_rejection_stats() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["sample", "--model", "renewal", "--mode", "autoregressive"])
        .args(["--n-samples", "3", "--n-events", "10", "--seed", "4"])
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let stats = read(&dir.path().join("stats.json"));
    assert!(!stats.contains("avg_step"));
    assert!(!stats.contains("time_constant_mean"));
}
