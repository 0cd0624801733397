//! The linear auditor: train an N=1 probe, derive the pruning threshold
//! `tau = 2 * mean(|w|)` and flag every feature whose weight magnitude
//! strictly exceeds it.

use crate::dataprep::DatasetMatrix;
use crate::error::{Error, Result};
use crate::nncore::{accuracy, train_linear, TrainConfig, TrainingTrace};
use serde::Serialize;

/// Audit outcome: per-feature weight magnitudes, the threshold and the
/// flagged shortcut set (descending by magnitude).
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub bias: f64,
    pub features: Vec<AuditFeature>,
    pub flagged: Vec<String>,
    pub probe_train_accuracy: f64,
    pub seed: u64,
    pub tau: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AuditFeature {
    pub abs_weight: f64,
    pub flagged: bool,
    pub name: String,
}

impl AuditReport {
    pub fn feature_names(&self) -> Vec<&str> {
        self.features.iter().map(|f| f.name.as_str()).collect()
    }

    pub fn abs_weights(&self) -> Vec<f64> {
        self.features.iter().map(|f| f.abs_weight).collect()
    }
}

/// `tau = 2 * mean(|w_i|)` over the feature weights (bias excluded).
pub fn prune_threshold(abs_weights: &[f64]) -> Result<f64> {
    if abs_weights.is_empty() {
        return Err(Error::EmptyInput("abs_weights".into()));
    }
    Ok(2.0 * abs_weights.iter().sum::<f64>() / abs_weights.len() as f64)
}

/// Names with `|w_i| > tau` (strict), sorted descending by magnitude.
pub fn flag_shortcuts(
    abs_weights: &[f64],
    feature_names: &[String],
    tau: f64,
) -> Result<Vec<String>> {
    if abs_weights.len() != feature_names.len() {
        return Err(Error::LengthMismatch {
            left: abs_weights.len(),
            right: feature_names.len(),
        });
    }
    let mut flagged: Vec<(f64, &String)> = abs_weights
        .iter()
        .zip(feature_names)
        .filter(|(&w, _)| w > tau)
        .map(|(&w, n)| (w, n))
        .collect();
    flagged.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(flagged.into_iter().map(|(_, n)| n.clone()).collect())
}

/// Train the unregularized probe on standardized training data and assemble
/// the audit report. Deterministic for a fixed `cfg.seed`.
pub fn run_audit(train: &DatasetMatrix, cfg: &TrainConfig) -> Result<AuditReport> {
    let mut cfg = cfg.clone();
    cfg.l1_lambda = 0.0;
    let (probe, _trace): (_, TrainingTrace) = train_linear(train, &cfg)?;
    let abs = probe.abs_weights();
    let tau = prune_threshold(&abs)?;
    let names: Vec<String> = train.feature_names().iter().map(|s| s.to_string()).collect();
    let flagged = flag_shortcuts(&abs, &names, tau)?;
    let features = names
        .iter()
        .zip(&abs)
        .map(|(name, &abs_weight)| AuditFeature {
            abs_weight,
            flagged: abs_weight > tau,
            name: name.clone(),
        })
        .collect();
    Ok(AuditReport {
        bias: probe.bias,
        features,
        flagged,
        probe_train_accuracy: accuracy(&probe, train)?,
        seed: cfg.seed,
        tau,
    })
}
