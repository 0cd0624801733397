//! Experiment orchestration: ingest, audit, prune, capacity sweep, final
//! models, counterfactual stress suite and baselines, with diffable file
//! outputs and a run manifest.

use crate::auditor::{run_audit, AuditReport};
use crate::baselines::{compare_importance, cost_compare, run_jtt, train_l1_probe, CostReport, JttConfig};
use crate::capacity::{detect_transition, sweep_capacity, CapacityCurve, TransitionResult};
use crate::census_sim::{self, CensusSimConfig};
use crate::config::{DataConfig, ExperimentConfig, StressSection};
use crate::dataprep::{
    drop_features, encode_standardize, encode_with_stats, parse_table, split, split_raw,
    DatasetMatrix, FeatureSchema,
};
use crate::error::{Error, Result};
use crate::nncore::{accuracy, train_mlp, MlpModel, TrainingTrace};
use crate::report::{
    capacity_csv, importance_csv, stress_csv, to_json, write_text, ComparisonDoc,
};
use crate::stresstest::{stress_suite, StressScenarios};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::path::Path;
use std::time::Instant;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    IngestCheck,
    Audit,
    Sweep,
    Stress,
    Baselines,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::IngestCheck,
        Stage::Audit,
        Stage::Sweep,
        Stage::Stress,
        Stage::Baselines,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Stage::IngestCheck => "ingest-check",
            Stage::Audit => "audit",
            Stage::Sweep => "sweep",
            Stage::Stress => "stress",
            Stage::Baselines => "baselines",
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ingest-check" => Ok(Stage::IngestCheck),
            "audit" => Ok(Stage::Audit),
            "sweep" => Ok(Stage::Sweep),
            "stress" => Ok(Stage::Stress),
            "baselines" => Ok(Stage::Baselines),
            other => Err(Error::Config(format!("unknown stage {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageStatus {
    pub name: String,
    pub seconds: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub artifacts: Vec<String>,
    pub config_digest: String,
    pub stages: Vec<StageStatus>,
    pub tool_version: String,
}

/// Everything the stages share once ingestion ran.
pub struct PreparedData {
    pub train: DatasetMatrix,
    pub test: DatasetMatrix,
    pub rows_loaded: usize,
    pub rows_dropped: usize,
}

/// Load, encode and split the configured data source. Held-out rows are
/// encoded with training-set statistics.
pub fn prepare_data(cfg: &ExperimentConfig) -> Result<PreparedData> {
    match &cfg.data {
        DataConfig::Xor { n, leak_rate, noise_std } => {
            let data = crate::dataprep::gen_xor_shortcut(*n, *leak_rate, *noise_std, cfg.seed)?;
            let pair = split(&data, cfg.train_fraction, cfg.seed)?;
            Ok(PreparedData {
                train: pair.train,
                test: pair.test,
                rows_loaded: *n,
                rows_dropped: 0,
            })
        }
        DataConfig::Csv { path, schema } => {
            let schema = match schema {
                Some(s) => s.to_schema()?,
                None => census_sim::schema(),
            };
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            prepare_table(cfg, &text, &schema)
        }
        DataConfig::CensusSim { n, leak_rate, label_noise } => {
            let mut sim = CensusSimConfig {
                n: *n,
                seed: cfg.seed,
                ..Default::default()
            };
            if let Some(l) = leak_rate {
                sim.leak_rate = *l;
            }
            if let Some(l) = label_noise {
                sim.label_noise = *l;
            }
            let text = census_sim::generate_text(&sim);
            prepare_table(cfg, &text, &census_sim::schema())
        }
    }
}

fn prepare_table(
    cfg: &ExperimentConfig,
    text: &str,
    schema: &FeatureSchema,
) -> Result<PreparedData> {
    let raw = parse_table(text, schema)?;
    let dropped = raw.dropped_missing;
    let loaded = raw.rows.len();
    let features = cfg.effective_features();
    let (raw_train, raw_test) = split_raw(&raw, cfg.train_fraction, cfg.seed)?;
    let train = encode_standardize(&raw_train, schema, &features)?;
    let test = encode_with_stats(&raw_test, schema, train.columns())?;
    Ok(PreparedData {
        train,
        test,
        rows_loaded: loaded,
        rows_dropped: dropped,
    })
}

pub struct PipelineOutput {
    pub manifest: RunManifest,
    pub audit: Option<AuditReport>,
    pub curves: Vec<CapacityCurve>,
    pub transitions: Vec<(String, TransitionResult)>,
}

fn out_path(dir: &str, file: &str) -> String {
    Path::new(dir).join(file).to_string_lossy().into_owned()
}

fn config_digest(cfg: &ExperimentConfig) -> Result<String> {
    let canonical = to_json(cfg)?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}

fn train_final_models(
    cfg: &ExperimentConfig,
    data: &PreparedData,
    pruned_train: &DatasetMatrix,
) -> Result<(MlpModel, TrainingTrace, MlpModel, TrainingTrace)> {
    let mlp_cfg = cfg.train.mlp_config(cfg.seed);
    let (baseline, trace_b) = train_mlp(&data.train, cfg.final_width, &mlp_cfg)?;
    let (robust, trace_r) = train_mlp(pruned_train, cfg.final_width, &mlp_cfg)?;
    Ok((baseline, trace_b, robust, trace_r))
}

/// Execute the requested stages, writing one artifact set under
/// `cfg.out_dir`. The manifest is written only when every stage runs.
pub fn run_pipeline(cfg: &ExperimentConfig, stages: &[Stage]) -> Result<PipelineOutput> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;

    let mut artifacts: Vec<String> = Vec::new();
    let mut statuses: Vec<StageStatus> = Vec::new();
    let record = |statuses: &mut Vec<StageStatus>, name: &str, start: Instant| {
        statuses.push(StageStatus {
            name: name.to_string(),
            seconds: start.elapsed().as_secs_f64(),
            status: "ok".into(),
        });
    };

    let wants = |stage: Stage| stages.contains(&stage);

    // ingest always runs; it is a prerequisite of everything else
    let start = Instant::now();
    let data = prepare_data(cfg)?;
    record(&mut statuses, Stage::IngestCheck.name(), start);

    let mut output = PipelineOutput {
        manifest: RunManifest {
            artifacts: Vec::new(),
            config_digest: config_digest(cfg)?,
            stages: Vec::new(),
            tool_version: TOOL_VERSION.into(),
        },
        audit: None,
        curves: Vec::new(),
        transitions: Vec::new(),
    };

    let needs_audit = wants(Stage::Audit)
        || wants(Stage::Sweep)
        || wants(Stage::Stress)
        || wants(Stage::Baselines);
    if !needs_audit {
        output.manifest.stages = statuses;
        return Ok(output);
    }

    // audit and prune
    let start = Instant::now();
    let probe_cfg = cfg.train.probe_config(cfg.seed);
    let audit = run_audit(&data.train, &probe_cfg)?;
    if wants(Stage::Audit) {
        let path = out_path(&cfg.out_dir, "audit.json");
        write_text(&to_json(&audit)?, &path)?;
        artifacts.push(path);
        record(&mut statuses, Stage::Audit.name(), start);
    }
    let flagged = audit.flagged.clone();
    let (pruned_train, pruned_test) = if flagged.is_empty() {
        (data.train.clone(), data.test.clone())
    } else {
        (
            drop_features(&data.train, &flagged)?,
            drop_features(&data.test, &flagged)?,
        )
    };

    if wants(Stage::Sweep) {
        let start = Instant::now();
        let sweep_cfg = cfg.train.mlp_config(cfg.seed);
        let aggregation = cfg.sweep.aggregation()?;
        let baseline_curve = sweep_capacity(
            &data.train,
            &data.test,
            &cfg.sweep.widths,
            &sweep_cfg,
            cfg.sweep.seeds_per_point,
            aggregation,
            "baseline",
        )?;
        let pruned_curve = sweep_capacity(
            &pruned_train,
            &pruned_test,
            &cfg.sweep.widths,
            &sweep_cfg,
            cfg.sweep.seeds_per_point,
            aggregation,
            "pruned",
        )?;
        let curves = vec![baseline_curve, pruned_curve];
        let csv_path = out_path(&cfg.out_dir, "capacity.csv");
        write_text(&capacity_csv(&curves), &csv_path)?;
        artifacts.push(csv_path);

        let mut transitions = Vec::new();
        for curve in &curves {
            transitions.push((
                curve.variant_label.clone(),
                detect_transition(curve, cfg.sweep.delta)?,
            ));
        }
        #[derive(Serialize)]
        struct CapacityDoc<'a> {
            curves: &'a [CapacityCurve],
            transitions: Vec<TransitionDoc<'a>>,
        }
        #[derive(Serialize)]
        struct TransitionDoc<'a> {
            result: &'a TransitionResult,
            variant: &'a str,
        }
        let doc = CapacityDoc {
            curves: &curves,
            transitions: transitions
                .iter()
                .map(|(v, r)| TransitionDoc {
                    result: r,
                    variant: v,
                })
                .collect(),
        };
        let json_path = out_path(&cfg.out_dir, "capacity.json");
        write_text(&to_json(&doc)?, &json_path)?;
        artifacts.push(json_path);
        output.curves = curves;
        output.transitions = transitions;
        record(&mut statuses, Stage::Sweep.name(), start);
    }

    if wants(Stage::Stress) {
        if let Some(stress) = cfg.effective_stress() {
            let start = Instant::now();
            let (baseline, _, robust, _) = train_final_models(cfg, &data, &pruned_train)?;
            let scenarios = scenarios_from(&stress);
            let reports = stress_suite(
                (&baseline, &data.test),
                (&robust, &pruned_test),
                &scenarios,
            )?;
            let json_path = out_path(&cfg.out_dir, "stress.json");
            write_text(&to_json(&reports)?, &json_path)?;
            artifacts.push(json_path);
            let csv_path = out_path(&cfg.out_dir, "stress.csv");
            write_text(&stress_csv(&reports), &csv_path)?;
            artifacts.push(csv_path);
            record(&mut statuses, Stage::Stress.name(), start);
        }
    }

    if wants(Stage::Baselines) && cfg.baselines.enabled {
        let start = Instant::now();
        let (l1_probe, _) = train_l1_probe(&data.train, cfg.baselines.l1_lambda, &probe_cfg)?;
        let importance = compare_importance(&audit, &l1_probe)?;

        let mlp_cfg = cfg.train.mlp_config(cfg.seed);
        let (_, erm_trace) = train_mlp(&data.train, cfg.final_width, &mlp_cfg)?;
        let erm_cost = CostReport {
            epochs_total: erm_trace.epochs,
            method: "erm".into(),
            trained_parameters_total: erm_trace.parameter_count,
            wall_seconds: 0.0,
        };
        let jtt_cfg = JttConfig {
            upweight_factor: cfg.baselines.jtt_upweight,
            phase1_epochs: cfg.train.epochs,
            phase2_epochs: cfg.train.epochs,
        };
        let (_, jtt_cost) = run_jtt(&data.train, cfg.final_width, &jtt_cfg, &mlp_cfg)?;
        // auditor pipeline: one probe plus the robust model
        let (_, robust_trace) = train_mlp(&pruned_train, cfg.final_width, &mlp_cfg)?;
        let auditor_cost = CostReport {
            epochs_total: probe_cfg.epochs + robust_trace.epochs,
            method: "auditor".into(),
            trained_parameters_total: data.train.d() + 1 + robust_trace.parameter_count,
            wall_seconds: 0.0,
        };
        let costs = cost_compare(&[erm_cost, jtt_cost, auditor_cost])?;

        let doc = ComparisonDoc { costs, importance };
        let json_path = out_path(&cfg.out_dir, "comparison.json");
        write_text(&to_json(&doc)?, &json_path)?;
        artifacts.push(json_path);
        let csv_path = out_path(&cfg.out_dir, "importance.csv");
        write_text(&importance_csv(&doc.importance), &csv_path)?;
        artifacts.push(csv_path);
        record(&mut statuses, Stage::Baselines.name(), start);
    }

    output.audit = Some(audit);
    output.manifest.stages = statuses;

    // the manifest itself is only part of full runs
    let full_run = Stage::ALL.iter().all(|s| wants(*s));
    if full_run {
        let manifest_path = out_path(&cfg.out_dir, "manifest.json");
        artifacts.push(manifest_path.clone());
        output.manifest.artifacts = artifacts;
        write_text(&to_json(&output.manifest)?, &manifest_path)?;
    } else {
        output.manifest.artifacts = artifacts;
    }
    Ok(output)
}

fn scenarios_from(stress: &StressSection) -> StressScenarios {
    StressScenarios {
        inject_feature: stress.inject_feature.clone(),
        inject_value: stress.inject_value,
        override_group: stress.override_group.clone(),
        override_category: stress.override_category.clone(),
        threshold: stress.threshold,
    }
}

/// Parse-and-report entry for the `ingest-check` subcommand.
pub fn ingest_check(cfg: &ExperimentConfig) -> Result<String> {
    let data = prepare_data(cfg)?;
    let train_acc_base = {
        // cheap sanity signal: majority-class rate of the training split
        let pos: usize = data.train.targets().iter().map(|&t| t as usize).sum();
        let n = data.train.n();
        (pos.max(n - pos)) as f64 / n as f64
    };
    Ok(format!(
        "rows: {} kept, {} dropped for missing values\ntrain: {} rows, test: {} rows, {} features\nmajority-class rate (train): {:.4}\nfeatures: {}\n",
        data.rows_loaded,
        data.rows_dropped,
        data.train.n(),
        data.test.n(),
        data.train.d(),
        train_acc_base,
        data.train.feature_names().join(", ")
    ))
}

/// Convenience: accuracy of a model on both splits.
pub fn split_accuracy(model: &MlpModel, data: &PreparedData) -> Result<(f64, f64)> {
    Ok((accuracy(model, &data.train)?, accuracy(model, &data.test)?))
}
