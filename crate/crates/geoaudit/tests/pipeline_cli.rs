//! End-to-end pipeline and CLI checks on a small synthetic configuration.

use geoaudit::config::ExperimentConfig;
use geoaudit::pipeline::{ingest_check, run_pipeline, Stage};
use std::path::Path;
use std::process::Command;

fn xor_config(out: &Path) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        r#"
seed = 5
out_dir = {out:?}
final_width = 8

[data]
kind = "xor"
n = 800
leak_rate = 0.95
noise_std = 0.1

[sweep]
widths = [1, 4]
seeds_per_point = 1
aggregation = "mean"
delta = 0.01
"#,
        out = out.display().to_string()
    ))
    .unwrap()
}

#[test]
fn full_xor_run_writes_expected_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = xor_config(dir.path());
    let output = run_pipeline(&cfg, &Stage::ALL).unwrap();

    let audit = output.audit.expect("audit ran");
    assert_eq!(audit.flagged, vec!["shortcut"]);

    for file in [
        "audit.json",
        "capacity.csv",
        "capacity.json",
        "comparison.json",
        "importance.csv",
        "manifest.json",
    ] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
    // the xor source has no stress scenario, so no stress artifacts
    assert!(!dir.path().join("stress.json").exists());

    // every artifact the manifest lists must exist on disk
    for artifact in &output.manifest.artifacts {
        assert!(Path::new(artifact).exists(), "manifest lists missing {artifact}");
    }
    assert_eq!(output.curves.len(), 2);
    assert_eq!(output.transitions.len(), 2);
    let names: Vec<&str> = output.manifest.stages.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        ["ingest-check", "audit", "sweep", "baselines"],
        "stress is skipped for xor"
    );
}

#[test]
fn stage_restricted_run_writes_only_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = xor_config(dir.path());
    run_pipeline(&cfg, &[Stage::Audit]).unwrap();
    assert!(dir.path().join("audit.json").exists());
    for file in ["capacity.csv", "comparison.json", "manifest.json"] {
        assert!(!dir.path().join(file).exists(), "unexpected {file}");
    }
}

#[test]
fn ingest_check_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let summary = ingest_check(&xor_config(dir.path())).unwrap();
    assert!(summary.contains("800 kept"));
    assert!(summary.contains("3 features"));
    assert!(summary.contains("shortcut"));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_geoaudit"))
}

#[test]
fn cli_audit_subcommand_writes_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        "seed = 1\n[data]\nkind = \"xor\"\nn = 400\nleak_rate = 1.0\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = cli()
        .args(["audit", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("audit.json").exists());
}

#[test]
fn cli_rejects_malformed_config_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.toml");
    std::fs::write(&config_path, "train_fraction = 2.0\n[data]\nkind = \"xor\"\nn = 10\nleak_rate = 1.0\n").unwrap();
    let status = cli()
        .args(["audit", "--config"])
        .arg(&config_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn cli_reports_missing_data_file_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        "[data]\nkind = \"csv\"\npath = \"/nonexistent/adult.data\"\n",
    )
    .unwrap();
    let status = cli()
        .args(["ingest-check", "--config"])
        .arg(&config_path)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_stage_list_filters_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.toml");
    std::fs::write(
        &config_path,
        "seed = 2\n[data]\nkind = \"xor\"\nn = 400\nleak_rate = 1.0\n[sweep]\nwidths = [1, 4]\nseeds_per_point = 1\naggregation = \"mean\"\ndelta = 0.01\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = cli()
        .args(["run", "--stage", "audit,sweep", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out_dir.join("audit.json").exists());
    assert!(out_dir.join("capacity.csv").exists());
    assert!(!out_dir.join("comparison.json").exists());
    assert!(!out_dir.join("manifest.json").exists(), "partial runs have no manifest");
}
