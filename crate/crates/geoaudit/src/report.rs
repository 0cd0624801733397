//! Diffable report emission: JSON with sorted keys, CSV with fixed headers,
//! all floats rounded to 6 significant digits.

use crate::auditor::AuditReport;
use crate::baselines::{ImportanceComparison, RelativeCost};
use crate::capacity::CapacityCurve;
use crate::error::{Error, Result};
use crate::stresstest::CounterfactualReport;
use serde::Serialize;
use serde_json::Value;

/// Round to 6 significant digits.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(5 - magnitude);
    (x * factor).round() / factor
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    return serde_json::Number::from_f64(sig6(f))
                        .map(Value::Number)
                        .unwrap_or(Value::Null);
                }
            }
            Value::Number(n)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        // serde_json's default map is ordered by key, so objects come out sorted
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

/// Serialize any report to JSON text with sorted keys and rounded floats.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let value = serde_json::to_value(report)?;
    let mut text = serde_json::to_string_pretty(&round_value(value))?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(report: &T, path: &str) -> Result<()> {
    std::fs::write(path, to_json(report)?).map_err(|e| Error::io(path, e))
}

fn fmt6(x: f64) -> String {
    format!("{}", sig6(x))
}

/// `variant,hidden_width,train_acc,test_acc` rows for one or more curves.
pub fn capacity_csv(curves: &[CapacityCurve]) -> String {
    let mut out = String::from("variant,hidden_width,train_acc,test_acc\n");
    for curve in curves {
        for p in &curve.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                curve.variant_label,
                p.hidden_width,
                fmt6(p.train_accuracy),
                fmt6(p.test_accuracy)
            ));
        }
    }
    out
}

/// `scenario,model,eligible,flipped,flip_rate_pct` rows.
pub fn stress_csv(reports: &[CounterfactualReport]) -> String {
    let mut out = String::from("scenario,model,eligible,flipped,flip_rate_pct\n");
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.scenario,
            r.model_label,
            r.eligible_rows,
            r.flipped,
            fmt6(r.flip_rate_pct)
        ));
    }
    out
}

/// `feature,auditor_weight,l1_weight` rows.
pub fn importance_csv(cmp: &ImportanceComparison) -> String {
    let mut out = String::from("feature,auditor_weight,l1_weight\n");
    for i in 0..cmp.feature_names.len() {
        out.push_str(&format!(
            "{},{},{}\n",
            cmp.feature_names[i],
            fmt6(cmp.auditor_abs_weights[i]),
            fmt6(cmp.l1_abs_weights[i])
        ));
    }
    out
}

pub fn write_text(text: &str, path: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Format gate for the generic report writer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Write an audit report in the requested format (CSV uses the
/// feature/weight table).
pub fn write_audit(report: &AuditReport, path: &str, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Json => write_json(report, path),
        ReportFormat::Csv => {
            let mut out = String::from("feature,abs_weight,flagged\n");
            for f in &report.features {
                out.push_str(&format!("{},{},{}\n", f.name, fmt6(f.abs_weight), f.flagged));
            }
            write_text(&out, path)
        }
    }
}

/// Combined JSON for the baseline comparison stage.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonDoc {
    pub costs: Vec<RelativeCost>,
    pub importance: ImportanceComparison,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auditor::run_audit;
    use crate::dataprep::gen_xor_shortcut;
    use crate::nncore::TrainConfig;

    #[test]
    fn sig6_rounds_to_six_digits() {
        assert_eq!(sig6(1.2345678), 1.23457);
        assert_eq!(sig6(0.000123456789), 0.000123457);
        assert_eq!(sig6(-987654.321), -987654.0);
        assert_eq!(sig6(0.0), 0.0);
    }

    #[test]
    fn json_keys_are_sorted() {
        let data = gen_xor_shortcut(200, 1.0, 0.0, 1).unwrap();
        let report = run_audit(&data, &TrainConfig::probe(1)).unwrap();
        let text = to_json(&report).unwrap();
        let bias = text.find("\"bias\"").unwrap();
        let features = text.find("\"features\"").unwrap();
        let tau = text.find("\"tau\"").unwrap();
        assert!(bias < features && features < tau);
    }

    #[test]
    fn unknown_format_rejected() {
        assert!("yaml".parse::<ReportFormat>().is_err());
        assert!("json".parse::<ReportFormat>().is_ok());
    }

    #[test]
    fn csv_headers_fixed() {
        assert!(capacity_csv(&[]).starts_with("variant,hidden_width,train_acc,test_acc\n"));
        assert!(stress_csv(&[]).starts_with("scenario,model,eligible,flipped,flip_rate_pct\n"));
    }
}
