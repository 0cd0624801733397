//! Competing methods: L1-regularized probing, a desk-scale two-phase
//! retraining pipeline (initial ERM, then retrain with misclassified rows
//! upweighted), and epoch/parameter cost accounting.

use crate::auditor::AuditReport;
use crate::dataprep::DatasetMatrix;
use crate::error::{Error, Result};
use crate::nncore::{
    train_linear, train_mlp, LinearProbe, MlpModel, Predictor, TrainConfig, TrainingTrace,
};
use serde::Serialize;
use std::time::Instant;

/// Aligned auditor-vs-L1 weight magnitudes.
#[derive(Debug, Clone, Serialize)]
pub struct ImportanceComparison {
    pub auditor_abs_weights: Vec<f64>,
    pub auditor_top: String,
    pub feature_names: Vec<String>,
    pub l1_abs_weights: Vec<f64>,
    /// Fraction of L1 weights with `|w| < 0.1 * max|w|`.
    pub l1_sparsity: f64,
    pub l1_top: String,
}

/// Epoch and parameter budget one method consumed.
#[derive(Debug, Clone, Serialize)]
pub struct CostReport {
    pub epochs_total: usize,
    pub method: String,
    pub trained_parameters_total: usize,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JttConfig {
    pub upweight_factor: usize,
    pub phase1_epochs: usize,
    pub phase2_epochs: usize,
}

impl JttConfig {
    pub fn new(upweight_factor: usize, phase1_epochs: usize, phase2_epochs: usize) -> Result<Self> {
        if upweight_factor < 1 {
            return Err(Error::InvalidParameter {
                name: "upweight_factor",
                reason: "must be >= 1".into(),
            });
        }
        Ok(JttConfig {
            upweight_factor,
            phase1_epochs,
            phase2_epochs,
        })
    }
}

impl Default for JttConfig {
    fn default() -> Self {
        JttConfig {
            upweight_factor: 5,
            phase1_epochs: 200,
            phase2_epochs: 200,
        }
    }
}

/// The L1 baseline entry point: `train_linear` with the given penalty.
pub fn train_l1_probe(
    data: &DatasetMatrix,
    lambda: f64,
    cfg: &TrainConfig,
) -> Result<(LinearProbe, TrainingTrace)> {
    let mut cfg = cfg.clone();
    cfg.l1_lambda = lambda;
    train_linear(data, &cfg)
}

/// Align auditor and L1 magnitudes over one feature space.
pub fn compare_importance(
    audit: &AuditReport,
    l1_probe: &LinearProbe,
) -> Result<ImportanceComparison> {
    let names: Vec<String> = audit.feature_names().iter().map(|s| s.to_string()).collect();
    if names.len() != l1_probe.weights.len() {
        return Err(Error::LengthMismatch {
            left: names.len(),
            right: l1_probe.weights.len(),
        });
    }
    let auditor_abs = audit.abs_weights();
    let l1_abs = l1_probe.abs_weights();
    let top = |abs: &[f64]| -> String {
        let idx = (0..abs.len())
            .max_by(|&a, &b| abs[a].total_cmp(&abs[b]))
            .expect("nonempty");
        names[idx].clone()
    };
    let max_l1 = l1_abs.iter().copied().fold(0.0f64, f64::max);
    let l1_sparsity = if max_l1 == 0.0 {
        // all-zero weights: every weight is negligible
        1.0
    } else {
        l1_abs.iter().filter(|&&w| w < 0.1 * max_l1).count() as f64 / l1_abs.len() as f64
    };
    let auditor_top = top(&auditor_abs);
    let l1_top = top(&l1_abs);
    Ok(ImportanceComparison {
        auditor_top,
        auditor_abs_weights: auditor_abs,
        feature_names: names,
        l1_top,
        l1_abs_weights: l1_abs,
        l1_sparsity,
    })
}

/// Two-phase retraining: phase 1 trains an ERM model, phase 2 retrains from
/// fresh initialization on the training set with rows the phase-1 model
/// misclassified replicated `upweight_factor` times in total.
pub fn run_jtt(
    train: &DatasetMatrix,
    width: usize,
    jtt: &JttConfig,
    cfg: &TrainConfig,
) -> Result<(MlpModel, CostReport)> {
    let start = Instant::now();
    let mut phase1_cfg = cfg.clone();
    phase1_cfg.epochs = jtt.phase1_epochs;
    let (erm, trace1) = train_mlp(train, width, &phase1_cfg)?;

    let mut misclassified = Vec::new();
    for i in 0..train.n() {
        let hard = (erm.predict(train.row(i))? >= 0.5) as u8;
        if hard != train.targets()[i] {
            misclassified.push(i);
        }
    }

    let phase2_data = if jtt.upweight_factor > 1 && !misclassified.is_empty() {
        // append factor-1 extra copies of the error set, in row order
        let mut rows: Vec<Vec<f64>> = (0..train.n()).map(|i| train.row(i).to_vec()).collect();
        let mut targets = train.targets().to_vec();
        for _ in 1..jtt.upweight_factor {
            for &i in &misclassified {
                rows.push(train.row(i).to_vec());
                targets.push(train.targets()[i]);
            }
        }
        DatasetMatrix::from_rows(rows, targets, train.columns().to_vec())?
    } else {
        train.clone()
    };

    let mut phase2_cfg = cfg.clone();
    phase2_cfg.epochs = jtt.phase2_epochs;
    let (robust, trace2) = train_mlp(&phase2_data, width, &phase2_cfg)?;

    let cost = CostReport {
        epochs_total: trace1.epochs + trace2.epochs,
        method: "jtt".into(),
        trained_parameters_total: trace1.parameter_count + trace2.parameter_count,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((robust, cost))
}

/// One method's cost normalized against the plain ERM entry.
#[derive(Debug, Clone, Serialize)]
pub struct RelativeCost {
    pub epochs_total: usize,
    pub method: String,
    pub relative_epochs: f64,
    pub relative_parameters: f64,
    pub trained_parameters_total: usize,
}

/// Normalize every report against the `erm` entry; ascending by relative
/// epoch cost.
pub fn cost_compare(reports: &[CostReport]) -> Result<Vec<RelativeCost>> {
    if reports.len() < 2 {
        return Err(Error::MissingReference);
    }
    let erm = reports
        .iter()
        .find(|r| r.method == "erm")
        .ok_or(Error::MissingReference)?;
    let mut out: Vec<RelativeCost> = reports
        .iter()
        .map(|r| RelativeCost {
            epochs_total: r.epochs_total,
            method: r.method.clone(),
            relative_epochs: r.epochs_total as f64 / erm.epochs_total as f64,
            relative_parameters: r.trained_parameters_total as f64
                / erm.trained_parameters_total as f64,
            trained_parameters_total: r.trained_parameters_total,
        })
        .collect();
    out.sort_by(|a, b| {
        a.relative_epochs
            .total_cmp(&b.relative_epochs)
            .then_with(|| a.method.cmp(&b.method))
    });
    Ok(out)
}
