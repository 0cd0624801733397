//! Hidden-width sweeps and the capacity phase transition detector.

use crate::dataprep::DatasetMatrix;
use crate::error::{Error, Result};
use crate::nncore::{accuracy, train_mlp, TrainConfig};
use serde::Serialize;

pub const DEFAULT_WIDTHS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
pub const DEFAULT_TRANSITION_DELTA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    Mean,
    Best,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CapacityPoint {
    pub hidden_width: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Test-accuracy-vs-width curve for one data variant.
#[derive(Debug, Clone, Serialize)]
pub struct CapacityCurve {
    pub aggregation: Aggregation,
    pub points: Vec<CapacityPoint>,
    pub seeds_per_point: usize,
    pub variant_label: String,
}

/// First width whose test accuracy is within `delta` of the curve's best.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionResult {
    pub critical_width: usize,
    pub delta: f64,
    pub plateau_accuracy: f64,
}

/// Replicate seeds derive from the width value (not its position) so that a
/// sweep over a subset of widths reproduces the shared points exactly.
fn replicate_seed(base: u64, width: usize, replicate: usize) -> u64 {
    base.wrapping_add(width as u64 * 1009).wrapping_add(replicate as u64)
}

/// Train `seeds_per_point` networks per width and aggregate accuracies.
pub fn sweep_capacity(
    train: &DatasetMatrix,
    test: &DatasetMatrix,
    widths: &[usize],
    cfg: &TrainConfig,
    seeds_per_point: usize,
    aggregation: Aggregation,
    variant_label: &str,
) -> Result<CapacityCurve> {
    if widths.is_empty() {
        return Err(Error::EmptyInput("widths".into()));
    }
    if widths.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter {
            name: "widths",
            reason: "must be strictly increasing".into(),
        });
    }
    if seeds_per_point == 0 {
        return Err(Error::InvalidParameter {
            name: "seeds_per_point",
            reason: "must be >= 1".into(),
        });
    }
    if train.feature_names() != test.feature_names() {
        return Err(Error::Schema(
            "train/test feature names differ".into(),
        ));
    }
    let mut points = Vec::with_capacity(widths.len());
    for &width in widths {
        let mut train_accs = Vec::with_capacity(seeds_per_point);
        let mut test_accs = Vec::with_capacity(seeds_per_point);
        for rep in 0..seeds_per_point {
            let mut run_cfg = cfg.clone();
            run_cfg.seed = replicate_seed(cfg.seed, width, rep);
            let (model, _) = train_mlp(train, width, &run_cfg)?;
            train_accs.push(accuracy(&model, train)?);
            test_accs.push(accuracy(&model, test)?);
        }
        let agg = |vals: &[f64]| match aggregation {
            Aggregation::Mean => vals.iter().sum::<f64>() / vals.len() as f64,
            Aggregation::Best => vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        points.push(CapacityPoint {
            hidden_width: width,
            train_accuracy: agg(&train_accs),
            test_accuracy: agg(&test_accs),
        });
    }
    Ok(CapacityCurve {
        aggregation,
        points,
        seeds_per_point,
        variant_label: variant_label.to_string(),
    })
}

/// Locate the capacity phase transition: plateau accuracy is the maximum
/// test accuracy on the curve and the critical width is the smallest width
/// within `delta` of it.
pub fn detect_transition(curve: &CapacityCurve, delta: f64) -> Result<TransitionResult> {
    if curve.points.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "curve",
            reason: format!("needs >= 2 points, has {}", curve.points.len()),
        });
    }
    if delta < 0.0 {
        return Err(Error::InvalidParameter {
            name: "delta",
            reason: format!("{delta} < 0"),
        });
    }
    let plateau = curve
        .points
        .iter()
        .map(|p| p.test_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let critical = curve
        .points
        .iter()
        .find(|p| p.test_accuracy >= plateau - delta)
        .expect("plateau is attained by some point");
    Ok(TransitionResult {
        critical_width: critical.hidden_width,
        delta,
        plateau_accuracy: plateau,
    })
}
