//! Counterfactual stress harness: targeted feature interventions on held-out
//! rows and the prediction flip-rate metric.

use crate::dataprep::{ColumnInfo, DatasetMatrix};
use crate::error::{Error, Result};
use crate::nncore::Predictor;
use serde::Serialize;

/// Flip-rate outcome of one (scenario, model) pair.
#[derive(Debug, Clone, Serialize)]
pub struct CounterfactualReport {
    pub eligible_rows: usize,
    pub flip_rate_pct: f64,
    pub flipped: usize,
    pub model_label: String,
    pub scenario: String,
    /// True when the mutated feature was pruned away, making the model
    /// unreachable by this intervention.
    pub structurally_immune: bool,
}

/// Outcome of an intervention: the mutated matrix, or proof that the target
/// feature no longer exists.
pub enum Intervention {
    Mutated(DatasetMatrix),
    StructurallyImmune,
}

/// Write the standardized image of `raw_value` into `feature` for every
/// selected row. Returns `StructurallyImmune` when the column was pruned.
pub fn inject_numeric(
    data: &DatasetMatrix,
    feature: &str,
    raw_value: f64,
    selector: &[bool],
) -> Result<Intervention> {
    if selector.len() != data.n() {
        return Err(Error::LengthMismatch {
            left: selector.len(),
            right: data.n(),
        });
    }
    if !selector.iter().any(|&s| s) {
        return Err(Error::NoRowsSelected);
    }
    let Some(col) = data.column_index(feature) else {
        return Ok(Intervention::StructurallyImmune);
    };
    let ColumnInfo::Numeric { mean, std } = data.columns()[col].info else {
        return Err(Error::InvalidParameter {
            name: "feature",
            reason: format!("{feature:?} is not numeric"),
        });
    };
    let standardized = (raw_value - mean) / std;
    let mut out = data.clone();
    for (i, &selected) in selector.iter().enumerate() {
        if selected {
            out.set(i, col, standardized);
        }
    }
    Ok(Intervention::Mutated(out))
}

/// Set the `group=category` indicator to 1 for selected rows and every
/// surviving sibling indicator of the same group to 0.
pub fn override_category(
    data: &DatasetMatrix,
    group: &str,
    category: &str,
    selector: &[bool],
) -> Result<DatasetMatrix> {
    if selector.len() != data.n() {
        return Err(Error::LengthMismatch {
            left: selector.len(),
            right: data.n(),
        });
    }
    if !selector.iter().any(|&s| s) {
        return Err(Error::NoRowsSelected);
    }
    let mut target_col = None;
    let mut sibling_cols = Vec::new();
    for (j, meta) in data.columns().iter().enumerate() {
        if let ColumnInfo::Indicator { group: g, category: c } = &meta.info {
            if g == group {
                if c == category {
                    target_col = Some(j);
                } else {
                    sibling_cols.push(j);
                }
            }
        }
    }
    let Some(target_col) = target_col else {
        return Err(Error::UnknownFeature(format!("{group}={category}")));
    };
    let mut out = data.clone();
    for (i, &selected) in selector.iter().enumerate() {
        if selected {
            out.set(i, target_col, 1.0);
            for &j in &sibling_cols {
                out.set(i, j, 0.0);
            }
        }
    }
    Ok(out)
}

/// Compare hard predictions on rows that differ between `original` and
/// `modified`.
pub fn flip_rate(
    model: &dyn Predictor,
    original: &DatasetMatrix,
    modified: &DatasetMatrix,
    threshold: f64,
    scenario: &str,
    model_label: &str,
) -> Result<CounterfactualReport> {
    if original.n() != modified.n() || original.d() != modified.d() {
        return Err(Error::DimensionMismatch {
            expected: original.n() * original.d(),
            got: modified.n() * modified.d(),
        });
    }
    if original.d() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: model.input_dim(),
            got: original.d(),
        });
    }
    let mut eligible = 0usize;
    let mut flipped = 0usize;
    for i in 0..original.n() {
        if original.row(i) == modified.row(i) {
            continue;
        }
        eligible += 1;
        let before = model.predict(original.row(i))? >= threshold;
        let after = model.predict(modified.row(i))? >= threshold;
        if before != after {
            flipped += 1;
        }
    }
    if eligible == 0 {
        return Err(Error::ZeroEligibleRows);
    }
    Ok(CounterfactualReport {
        eligible_rows: eligible,
        flip_rate_pct: 100.0 * flipped as f64 / eligible as f64,
        flipped,
        model_label: model_label.to_string(),
        scenario: scenario.to_string(),
        structurally_immune: false,
    })
}

fn immune_report(scenario: &str, model_label: &str, selected: usize) -> CounterfactualReport {
    CounterfactualReport {
        eligible_rows: selected,
        flip_rate_pct: 0.0,
        flipped: 0,
        model_label: model_label.to_string(),
        scenario: scenario.to_string(),
        structurally_immune: true,
    }
}

/// Scenario parameters for the standard two-intervention suite.
#[derive(Debug, Clone)]
pub struct StressScenarios {
    /// Numeric leak injection: (feature, raw value).
    pub inject_feature: String,
    pub inject_value: f64,
    /// Categorical override: (one-hot group, category).
    pub override_group: String,
    pub override_category: String,
    pub threshold: f64,
}

pub const SCENARIO_INJECT: &str = "leak-injection";
pub const SCENARIO_OVERRIDE: &str = "category-override";

/// Run both interventions against both models.
///
/// The injection population is rows with true label 0 that the model itself
/// predicts 0 (flips then indicate pure leakage exploitation). The override
/// population is rows not already carrying the target category. Reports are
/// ordered by (scenario, model label).
pub fn stress_suite(
    baseline: (&dyn Predictor, &DatasetMatrix),
    robust: (&dyn Predictor, &DatasetMatrix),
    scenarios: &StressScenarios,
) -> Result<Vec<CounterfactualReport>> {
    let mut reports = Vec::with_capacity(4);
    for (label, model, test) in [
        ("baseline", baseline.0, baseline.1),
        ("robust", robust.0, robust.1),
    ] {
        // leak injection on true-negative, predicted-negative rows
        let mut selector = Vec::with_capacity(test.n());
        for i in 0..test.n() {
            let low = test.targets()[i] == 0
                && model.predict(test.row(i))? < scenarios.threshold;
            selector.push(low);
        }
        let report = match inject_numeric(
            test,
            &scenarios.inject_feature,
            scenarios.inject_value,
            &selector,
        )? {
            Intervention::Mutated(modified) => flip_rate(
                model,
                test,
                &modified,
                scenarios.threshold,
                SCENARIO_INJECT,
                label,
            )?,
            Intervention::StructurallyImmune => immune_report(
                SCENARIO_INJECT,
                label,
                selector.iter().filter(|&&s| s).count(),
            ),
        };
        reports.push(report);

        // category override on rows not already in the target category
        let target_name = format!("{}={}", scenarios.override_group, scenarios.override_category);
        let Some(col) = test.column_index(&target_name) else {
            reports.push(immune_report(SCENARIO_OVERRIDE, label, test.n()));
            continue;
        };
        let selector: Vec<bool> = (0..test.n()).map(|i| test.row(i)[col] != 1.0).collect();
        let modified = override_category(
            test,
            &scenarios.override_group,
            &scenarios.override_category,
            &selector,
        )?;
        reports.push(flip_rate(
            model,
            test,
            &modified,
            scenarios.threshold,
            SCENARIO_OVERRIDE,
            label,
        )?);
    }
    reports.sort_by(|a, b| {
        (a.scenario.as_str(), a.model_label.as_str())
            .cmp(&(b.scenario.as_str(), b.model_label.as_str()))
    });
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataprep::{
        drop_features, encode_standardize, parse_table, ColumnSpec, FeatureSchema,
    };
    use crate::nncore::LinearProbe;

    fn schema() -> FeatureSchema {
        FeatureSchema {
            columns: vec![
                ColumnSpec::numeric("gain"),
                ColumnSpec::categorical("rel", &["Husband", "Wife", "Single"]),
                ColumnSpec::categorical("label", &["no", "yes"]),
            ],
            target_column: "label".into(),
            positive_label: "yes".into(),
        }
    }

    fn dataset() -> DatasetMatrix {
        let raw = parse_table(
            "100,Husband,yes\n0,Wife,no\n50,Single,no\n200,Single,yes\n",
            &schema(),
        )
        .unwrap();
        encode_standardize(&raw, &schema(), &["gain".into(), "rel".into()]).unwrap()
    }

    #[test]
    fn inject_mean_writes_zero() {
        let data = dataset();
        let sel = vec![true; data.n()];
        let mean = match data.columns()[0].info {
            ColumnInfo::Numeric { mean, .. } => mean,
            _ => unreachable!(),
        };
        let Intervention::Mutated(out) = inject_numeric(&data, "gain", mean, &sel).unwrap() else {
            panic!("expected mutation");
        };
        for i in 0..out.n() {
            assert_eq!(out.row(i)[0], 0.0);
        }
    }

    #[test]
    fn inject_standardizes_raw_value() {
        let data = dataset();
        let (mean, std) = match data.columns()[0].info {
            ColumnInfo::Numeric { mean, std } => (mean, std),
            _ => unreachable!(),
        };
        let sel = vec![true, false, false, false];
        let Intervention::Mutated(out) = inject_numeric(&data, "gain", 500.0, &sel).unwrap() else {
            panic!("expected mutation");
        };
        assert!((out.row(0)[0] - (500.0 - mean) / std).abs() < 1e-12);
        assert_eq!(out.row(1), data.row(1));
    }

    #[test]
    fn inject_into_pruned_matrix_is_immune() {
        let data = dataset();
        let pruned = drop_features(&data, &["gain".into()]).unwrap();
        let sel = vec![true; pruned.n()];
        assert!(matches!(
            inject_numeric(&pruned, "gain", 99999.0, &sel).unwrap(),
            Intervention::StructurallyImmune
        ));
    }

    #[test]
    fn inject_rejects_empty_selection() {
        let data = dataset();
        let sel = vec![false; data.n()];
        assert!(matches!(
            inject_numeric(&data, "gain", 1.0, &sel),
            Err(Error::NoRowsSelected)
        ));
    }

    #[test]
    fn override_is_idempotent_and_exclusive() {
        let data = dataset();
        let sel = vec![true; data.n()];
        let once = override_category(&data, "rel", "Husband", &sel).unwrap();
        let twice = override_category(&once, "rel", "Husband", &sel).unwrap();
        assert_eq!(once, twice);
        let husband = once.column_index("rel=Husband").unwrap();
        let wife = once.column_index("rel=Wife").unwrap();
        let single = once.column_index("rel=Single").unwrap();
        for i in 0..once.n() {
            assert_eq!(once.row(i)[husband], 1.0);
            assert_eq!(once.row(i)[wife], 0.0);
            assert_eq!(once.row(i)[single], 0.0);
        }
    }

    #[test]
    fn override_missing_category_column_is_error() {
        let data = dataset();
        let no_husband = drop_features(&data, &["rel=Husband".into()]).unwrap();
        let sel = vec![true; data.n()];
        assert!(override_category(&no_husband, "rel", "Husband", &sel).is_err());
    }

    #[test]
    fn override_updates_surviving_subset() {
        let data = dataset();
        let partial = drop_features(&data, &["rel=Single".into()]).unwrap();
        let sel = vec![true; data.n()];
        let out = override_category(&partial, "rel", "Husband", &sel).unwrap();
        let husband = out.column_index("rel=Husband").unwrap();
        let wife = out.column_index("rel=Wife").unwrap();
        for i in 0..out.n() {
            assert_eq!(out.row(i)[husband], 1.0);
            assert_eq!(out.row(i)[wife], 0.0);
        }
    }

    #[test]
    fn flip_rate_identical_matrices_error() {
        let data = dataset();
        let probe = LinearProbe::zeros(data.d());
        assert!(matches!(
            flip_rate(&probe, &data, &data, 0.5, "s", "m"),
            Err(Error::ZeroEligibleRows)
        ));
    }

    #[test]
    fn constant_model_never_flips() {
        let data = dataset();
        let sel = vec![true; data.n()];
        let Intervention::Mutated(modified) = inject_numeric(&data, "gain", 99999.0, &sel).unwrap()
        else {
            panic!()
        };
        let probe = LinearProbe::zeros(data.d());
        let report = flip_rate(&probe, &data, &modified, 0.5, "s", "m").unwrap();
        assert_eq!(report.flipped, 0);
        assert_eq!(report.flip_rate_pct, 0.0);
        assert!(report.eligible_rows > 0);
    }

    #[test]
    fn leak_reliant_model_flips_everywhere() {
        let data = dataset();
        let gain = data.column_index("gain").unwrap();
        let mut weights = vec![0.0; data.d()];
        weights[gain] = 10.0;
        let probe = LinearProbe { weights, bias: -5.0 };
        let sel: Vec<bool> = (0..data.n())
            .map(|i| probe.predict(data.row(i)).unwrap() < 0.5)
            .collect();
        let Intervention::Mutated(modified) =
            inject_numeric(&data, "gain", 99999.0, &sel).unwrap()
        else {
            panic!()
        };
        let report = flip_rate(&probe, &data, &modified, 0.5, "s", "m").unwrap();
        assert_eq!(report.flip_rate_pct, 100.0);
    }

    #[test]
    fn structural_immunity_for_any_pruned_feature() {
        let data = dataset();
        for name in ["gain", "rel=Wife"] {
            let pruned = drop_features(&data, &[name.into()]).unwrap();
            let probe = LinearProbe {
                weights: vec![1.0; pruned.d()],
                bias: 0.0,
            };
            // mutating the dropped feature cannot produce any cell difference
            if name == "gain" {
                let sel = vec![true; pruned.n()];
                assert!(matches!(
                    inject_numeric(&pruned, name, 99999.0, &sel).unwrap(),
                    Intervention::StructurallyImmune
                ));
            }
            let _ = probe;
        }
    }

    #[test]
    fn flip_rate_invariant_under_row_permutation() {
        let data = dataset();
        let gain = data.column_index("gain").unwrap();
        let mut weights = vec![0.2; data.d()];
        weights[gain] = 3.0;
        let probe = LinearProbe { weights, bias: -1.0 };
        let sel = vec![true; data.n()];
        let Intervention::Mutated(modified) =
            inject_numeric(&data, "gain", 400.0, &sel).unwrap()
        else {
            panic!()
        };
        let base = flip_rate(&probe, &data, &modified, 0.5, "s", "m").unwrap();

        // reverse row order in both matrices
        let perm: Vec<usize> = (0..data.n()).rev().collect();
        let reorder = |m: &DatasetMatrix| {
            let rows: Vec<Vec<f64>> = perm.iter().map(|&i| m.row(i).to_vec()).collect();
            let targets: Vec<u8> = perm.iter().map(|&i| m.targets()[i]).collect();
            DatasetMatrix::from_rows(rows, targets, m.columns().to_vec()).unwrap()
        };
        let permuted = flip_rate(&probe, &reorder(&data), &reorder(&modified), 0.5, "s", "m").unwrap();
        assert_eq!(base.flipped, permuted.flipped);
        assert_eq!(base.eligible_rows, permuted.eligible_rows);
    }
}
