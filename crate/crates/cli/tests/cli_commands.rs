//! Command-level behavior: schema validation, seed handling, byte-identical
//! reruns, and verification exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn qse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qse"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, text: &str) {
    fs::write(path, text).unwrap();
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut entries: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    entries.sort();
    entries
}

const SMALL_DATASET: &str = r#"
version = 1
seed = 7
[dataset]
n_classes = 3
train_per_class = 20
test_per_class = 8
feature_dim = 6
separation = 5.0
"#;

#[test]
fn gen_data_is_reproducible_byte_for_byte() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("gen.toml");
    write(&config, SMALL_DATASET);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result = qse(&["gen-data", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    }
    assert_eq!(read_outputs(&out_a), read_outputs(&out_b));
    assert!(out_a.join("manifest.toml").exists());
}

#[test]
fn gen_data_requires_seed() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("gen.toml");
    write(&config, &SMALL_DATASET.replace("seed = 7\n", ""));
    let out = dir.path().join("out");
    let result = qse(&["gen-data", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!result.status.success());
    // --seed rescues the config.
    let result = qse(&[
        "gen-data",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "9",
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
}

#[test]
fn schema_violation_fails_before_side_effects() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("gen.toml");
    write(&config, &format!("{SMALL_DATASET}\nunknown_knob = 3\n"));
    let out = dir.path().join("out");
    let result = qse(&["gen-data", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("unknown_knob"), "error names the field path: {stderr}");
    assert!(!out.exists(), "no partial outputs on schema errors");
}

#[test]
fn train_runs_and_reruns_identically() {
    let dir = tempdir().unwrap();
    let gen_config = dir.path().join("gen.toml");
    write(&gen_config, SMALL_DATASET);
    let data = dir.path().join("data");
    assert!(qse(&["gen-data", "--config", gen_config.to_str().unwrap(), "--out", data.to_str().unwrap()])
        .status
        .success());

    let train_config = dir.path().join("train.toml");
    write(
        &train_config,
        &format!(
            r#"
version = 1
seed = 3
[data]
dir = "{}"
[model]
family = "hybrid"
n_qubits = 3
depth = 2
use_skip = true
[training]
epochs = 3
batch_size = 16
"#,
            data.display()
        ),
    );
    let out_a = dir.path().join("run-a");
    let out_b = dir.path().join("run-b");
    for out in [&out_a, &out_b] {
        let result =
            qse(&["train", "--config", train_config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    }
    assert_eq!(read_outputs(&out_a), read_outputs(&out_b));
    let metrics = fs::read_to_string(out_a.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("epoch,train_loss,test_top1_error\n"));
    assert_eq!(metrics.lines().count(), 4, "header plus one line per epoch");
    assert!(out_a.join("checkpoint.qsec").exists());
    let result = fs::read_to_string(out_a.join("result.csv")).unwrap();
    assert!(result.contains("hybrid_skip,3,2,true,"));
}

#[test]
fn train_rejects_oversized_model() {
    let dir = tempdir().unwrap();
    let gen_config = dir.path().join("gen.toml");
    write(&gen_config, SMALL_DATASET);
    let data = dir.path().join("data");
    assert!(qse(&["gen-data", "--config", gen_config.to_str().unwrap(), "--out", data.to_str().unwrap()])
        .status
        .success());
    let train_config = dir.path().join("train.toml");
    write(
        &train_config,
        &format!(
            "version = 1\nseed = 1\n[data]\ndir = \"{}\"\n[model]\nfamily = \"hybrid\"\nn_qubits = 7\n",
            data.display()
        ),
    );
    let out = dir.path().join("out");
    let result = qse(&["train", "--config", train_config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!result.status.success());
}

#[test]
fn gradcheck_passes_and_negative_control_trips() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("grad.toml");
    write(
        &config,
        r#"
version = 1
seed = 11
[gradcheck]
instances = 4
qubit_choices = [2, 3]
depth_choices = [1, 2]
feature_dim = 5
n_classes = 3
"#,
    );
    let out = dir.path().join("out");
    let result = qse(&["gradcheck", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let report = fs::read_to_string(out.join("gradcheck_report.txt")).unwrap();
    assert!(report.contains("PASS"), "{report}");

    let sabotaged = dir.path().join("grad_neg.toml");
    write(
        &sabotaged,
        r#"
version = 1
seed = 11
[gradcheck]
instances = 2
qubit_choices = [3]
depth_choices = [2]
feature_dim = 5
n_classes = 3
negative_control = true
"#,
    );
    let result =
        qse(&["gradcheck", "--config", sabotaged.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(!result.status.success(), "wrong-sign shift must be detected");
}

#[test]
fn cut_verify_small_suite_passes() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("cut.toml");
    write(
        &config,
        r#"
version = 1
seed = 5
[cut_verify]
single_cut_circuits = 10
double_cut_circuits = 5
max_qubits = 4
max_depth = 3
"#,
    );
    let out = dir.path().join("out");
    let result = qse(&["cut-verify", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let report = fs::read_to_string(out.join("cut_verify_report.txt")).unwrap();
    assert!(report.contains("PASS"), "{report}");
    assert!(report.contains("empty plan: exact equality = true"), "{report}");
}

#[test]
fn simulate_writes_trace_and_metrics_deterministically() {
    let dir = tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/pinned_timeline.toml");
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result =
            qse(&["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    }
    assert_eq!(read_outputs(&out_a), read_outputs(&out_b));
    let trace = fs::read_to_string(out_a.join("trace.log")).unwrap();
    assert!(trace.contains("40.000,classified,c-cloud-cpu,0,latency=40.000 slo=ok"));
}

#[test]
fn parallelism_flag_does_not_change_results() {
    let dir = tempdir().unwrap();
    let gen_config = dir.path().join("gen.toml");
    write(&gen_config, SMALL_DATASET);
    let data = dir.path().join("data");
    assert!(qse(&["gen-data", "--config", gen_config.to_str().unwrap(), "--out", data.to_str().unwrap()])
        .status
        .success());
    let train_config = dir.path().join("train.toml");
    write(
        &train_config,
        &format!(
            r#"
version = 1
seed = 5
[data]
dir = "{}"
[model]
family = "hybrid"
n_qubits = 3
depth = 2
[training]
epochs = 2
batch_size = 8
"#,
            data.display()
        ),
    );
    let serial = dir.path().join("serial");
    let parallel = dir.path().join("parallel");
    assert!(qse(&[
        "train",
        "--config",
        train_config.to_str().unwrap(),
        "--out",
        serial.to_str().unwrap(),
        "--parallelism",
        "1",
    ])
    .status
    .success());
    assert!(qse(&[
        "train",
        "--config",
        train_config.to_str().unwrap(),
        "--out",
        parallel.to_str().unwrap(),
        "--parallelism",
        "2",
    ])
    .status
    .success());
    assert_eq!(read_outputs(&serial), read_outputs(&parallel));
}
