//! Tabular ingestion, encoding, standardization, splitting, pruning and the
//! synthetic XOR-with-shortcut generator.
//!
//! All numeric feature columns are z-scored with population statistics and
//! one-hot indicators stay in {0,1}, so probe weight magnitudes are
//! comparable across features. Per-column statistics are retained on the
//! matrix so held-out data can be encoded with training statistics and so
//! counterfactual raw values can be mapped into standardized space later.

use crate::error::{Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use std::collections::HashSet;

pub const MISSING_MARKER: &str = "?";
const STD_FLOOR: f64 = 1e-8;

/// How a raw column is interpreted.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Numeric,
    Categorical(Vec<String>),
    /// Present in the file but never used; missing markers here do not drop rows.
    Ignored,
}

#[derive(Debug, Clone)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

impl ColumnSpec {
    pub fn numeric(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Numeric,
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Categorical(categories.iter().map(|s| s.to_string()).collect()),
        }
    }

    pub fn ignored(name: &str) -> Self {
        ColumnSpec {
            name: name.to_string(),
            kind: ColumnKind::Ignored,
        }
    }
}

/// Layout of a raw comma-separated table.
#[derive(Debug, Clone)]
pub struct FeatureSchema {
    pub columns: Vec<ColumnSpec>,
    pub target_column: String,
    pub positive_label: String,
}

impl FeatureSchema {
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for col in &self.columns {
            if !seen.insert(col.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column {:?}", col.name)));
            }
            if let ColumnKind::Categorical(cats) = &col.kind {
                if cats.len() < 2 {
                    return Err(Error::Schema(format!(
                        "categorical column {:?} lists {} categories, need at least 2",
                        col.name,
                        cats.len()
                    )));
                }
            }
        }
        if self.column(&self.target_column).is_none() {
            return Err(Error::Schema(format!(
                "target column {:?} not in schema",
                self.target_column
            )));
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }
}

/// Parsed string-valued rows; rows with a missing marker in a used column
/// have already been dropped.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub rows: Vec<Vec<String>>,
    pub dropped_missing: usize,
}

/// Parse a comma-separated file against `schema`.
///
/// Values are trimmed, empty lines skipped. Rows carrying the `?` marker in
/// any non-ignored column are dropped and counted. Categorical values outside
/// the schema's list are an error.
pub fn load_table(path: &str, schema: &FeatureSchema) -> Result<RawTable> {
    schema.validate()?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_table(&text, schema)
}

pub fn parse_table(text: &str, schema: &FeatureSchema) -> Result<RawTable> {
    let expected = schema.columns.len();
    let mut rows = Vec::new();
    let mut dropped = 0usize;
    'line: for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let values: Vec<String> = line.split(',').map(|v| v.trim().to_string()).collect();
        if values.len() != expected {
            return Err(Error::MalformedRow {
                line: lineno + 1,
                expected,
                got: values.len(),
            });
        }
        for (col, value) in schema.columns.iter().zip(&values) {
            if matches!(col.kind, ColumnKind::Ignored) {
                continue;
            }
            if value == MISSING_MARKER {
                dropped += 1;
                continue 'line;
            }
            if let ColumnKind::Categorical(cats) = &col.kind {
                if !cats.iter().any(|c| c == value) {
                    return Err(Error::UnknownCategory {
                        column: col.name.clone(),
                        value: value.clone(),
                        line: lineno + 1,
                    });
                }
            }
        }
        rows.push(values);
    }
    Ok(RawTable {
        rows,
        dropped_missing: dropped,
    })
}

/// Encoded column metadata, enough to re-apply the transform.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnInfo {
    Numeric { mean: f64, std: f64 },
    Indicator { group: String, category: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColumnMeta {
    pub name: String,
    pub info: ColumnInfo,
}

/// Standardized feature matrix with binary targets and aligned column metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMatrix {
    features: Vec<f64>,
    targets: Vec<u8>,
    columns: Vec<ColumnMeta>,
    n: usize,
    d: usize,
}

impl DatasetMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, targets: Vec<u8>, columns: Vec<ColumnMeta>) -> Result<Self> {
        let n = rows.len();
        let d = columns.len();
        if targets.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: targets.len(),
            });
        }
        let mut features = Vec::with_capacity(n * d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            features.extend_from_slice(row);
            if targets[i] > 1 {
                return Err(Error::NonBinaryTarget {
                    row: i,
                    value: targets[i] as f64,
                });
            }
        }
        Ok(DatasetMatrix {
            features,
            targets,
            columns,
            n,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn targets(&self) -> &[u8] {
        &self.targets
    }

    pub fn columns(&self) -> &[ColumnMeta] {
        &self.columns
    }

    pub fn feature_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub(crate) fn set(&mut self, row: usize, col: usize, value: f64) {
        self.features[row * self.d + col] = value;
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Train/test pair sharing one column layout.
#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: DatasetMatrix,
    pub test: DatasetMatrix,
}

/// One entry of a resolved feature list: either a whole raw column or a
/// single `column=category` indicator.
enum FeatureRequest<'a> {
    Numeric(usize),
    WholeGroup(usize),
    SingleIndicator { col: usize, category: &'a str },
}

fn resolve_feature<'a>(schema: &FeatureSchema, name: &'a str) -> Result<FeatureRequest<'a>> {
    if let Some(idx) = schema.column_index(name) {
        if name == schema.target_column {
            return Err(Error::Schema(format!(
                "target column {name:?} cannot be used as a feature"
            )));
        }
        return match &schema.columns[idx].kind {
            ColumnKind::Numeric => Ok(FeatureRequest::Numeric(idx)),
            ColumnKind::Categorical(_) => Ok(FeatureRequest::WholeGroup(idx)),
            ColumnKind::Ignored => Err(Error::UnknownFeature(name.to_string())),
        };
    }
    if let Some((col, cat)) = name.split_once('=') {
        if let Some(idx) = schema.column_index(col) {
            if let ColumnKind::Categorical(cats) = &schema.columns[idx].kind {
                if cats.iter().any(|c| c == cat) {
                    return Ok(FeatureRequest::SingleIndicator {
                        col: idx,
                        category: cat,
                    });
                }
            }
        }
    }
    Err(Error::UnknownFeature(name.to_string()))
}

/// Encode the requested features, computing standardization statistics from
/// these rows. Numeric columns are z-scored with population statistics
/// (std floor 1e-8); categoricals expand to `col=value` indicators; the
/// target maps to 1 iff it equals the schema's positive label.
pub fn encode_standardize(
    raw: &RawTable,
    schema: &FeatureSchema,
    feature_list: &[String],
) -> Result<DatasetMatrix> {
    let columns = plan_columns(raw, schema, feature_list, None)?;
    encode_with_stats(raw, schema, &columns)
}

/// Encode rows with an existing column plan (training statistics reused for
/// held-out data).
pub fn encode_with_stats(
    raw: &RawTable,
    schema: &FeatureSchema,
    columns: &[ColumnMeta],
) -> Result<DatasetMatrix> {
    schema.validate()?;
    if raw.rows.is_empty() {
        return Err(Error::EmptyInput("all rows dropped or file empty".into()));
    }
    let target_idx = schema
        .column_index(&schema.target_column)
        .expect("validated schema");
    let n = raw.rows.len();
    let d = columns.len();
    let mut features = Vec::with_capacity(n * d);
    let mut targets = Vec::with_capacity(n);
    for row in &raw.rows {
        for meta in columns {
            match &meta.info {
                ColumnInfo::Numeric { mean, std } => {
                    let idx = schema
                        .column_index(&meta.name)
                        .ok_or_else(|| Error::UnknownFeature(meta.name.clone()))?;
                    let v: f64 = row[idx].parse().map_err(|_| {
                        Error::Schema(format!(
                            "non-numeric value {:?} in column {:?}",
                            row[idx], meta.name
                        ))
                    })?;
                    features.push((v - mean) / std);
                }
                ColumnInfo::Indicator { group, category } => {
                    let idx = schema
                        .column_index(group)
                        .ok_or_else(|| Error::UnknownFeature(group.clone()))?;
                    features.push(if row[idx] == *category { 1.0 } else { 0.0 });
                }
            }
        }
        targets.push(if row[target_idx] == schema.positive_label {
            1
        } else {
            0
        });
    }
    Ok(DatasetMatrix {
        features,
        targets,
        columns: columns.to_vec(),
        n,
        d,
    })
}

fn plan_columns(
    raw: &RawTable,
    schema: &FeatureSchema,
    feature_list: &[String],
    _reserved: Option<()>,
) -> Result<Vec<ColumnMeta>> {
    schema.validate()?;
    if feature_list.is_empty() {
        return Err(Error::EmptyInput("feature list".into()));
    }
    if raw.rows.is_empty() {
        return Err(Error::EmptyInput("all rows dropped or file empty".into()));
    }
    let mut columns = Vec::new();
    for name in feature_list {
        match resolve_feature(schema, name)? {
            FeatureRequest::Numeric(idx) => {
                let mut values = Vec::with_capacity(raw.rows.len());
                for row in &raw.rows {
                    let v: f64 = row[idx].parse().map_err(|_| {
                        Error::Schema(format!(
                            "non-numeric value {:?} in column {:?}",
                            row[idx], name
                        ))
                    })?;
                    values.push(v);
                }
                let (mean, std) = population_stats(&values);
                columns.push(ColumnMeta {
                    name: name.clone(),
                    info: ColumnInfo::Numeric {
                        mean,
                        std: std.max(STD_FLOOR),
                    },
                });
            }
            FeatureRequest::WholeGroup(idx) => {
                let ColumnKind::Categorical(cats) = &schema.columns[idx].kind else {
                    unreachable!()
                };
                for cat in cats {
                    columns.push(ColumnMeta {
                        name: format!("{name}={cat}"),
                        info: ColumnInfo::Indicator {
                            group: name.clone(),
                            category: cat.clone(),
                        },
                    });
                }
            }
            FeatureRequest::SingleIndicator { col, category } => {
                columns.push(ColumnMeta {
                    name: name.clone(),
                    info: ColumnInfo::Indicator {
                        group: schema.columns[col].name.clone(),
                        category: category.to_string(),
                    },
                });
            }
        }
    }
    Ok(columns)
}

fn population_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Deterministic shuffled split of raw rows; train size is
/// `floor(train_fraction * n)`.
pub fn split_raw(raw: &RawTable, train_fraction: f64, seed: u64) -> Result<(RawTable, RawTable)> {
    let idx = split_indices(raw.rows.len(), train_fraction, seed)?;
    let pick = |ids: &[usize]| RawTable {
        rows: ids.iter().map(|&i| raw.rows[i].clone()).collect(),
        dropped_missing: 0,
    };
    Ok((pick(&idx.0), pick(&idx.1)))
}

/// Deterministic shuffled split of an encoded matrix.
pub fn split(data: &DatasetMatrix, train_fraction: f64, seed: u64) -> Result<SplitPair> {
    let (train_ids, test_ids) = split_indices(data.n, train_fraction, seed)?;
    Ok(SplitPair {
        train: take_rows(data, &train_ids),
        test: take_rows(data, &test_ids),
    })
}

fn split_indices(n: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "train_fraction",
            reason: format!("{train_fraction} not in (0,1)"),
        });
    }
    if n < 2 {
        return Err(Error::EmptyInput("need at least 2 rows to split".into()));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_size = (train_fraction * n as f64).floor() as usize;
    let (train, test) = indices.split_at(train_size);
    if train.is_empty() || test.is_empty() {
        return Err(Error::DegenerateSplit {
            train: train.len(),
            test: test.len(),
        });
    }
    Ok((train.to_vec(), test.to_vec()))
}

fn take_rows(data: &DatasetMatrix, ids: &[usize]) -> DatasetMatrix {
    let mut features = Vec::with_capacity(ids.len() * data.d);
    let mut targets = Vec::with_capacity(ids.len());
    for &i in ids {
        features.extend_from_slice(data.row(i));
        targets.push(data.targets[i]);
    }
    DatasetMatrix {
        features,
        targets,
        columns: data.columns.clone(),
        n: ids.len(),
        d: data.d,
    }
}

/// Remove the named columns; remaining column order is preserved.
pub fn drop_features(data: &DatasetMatrix, names: &[String]) -> Result<DatasetMatrix> {
    for name in names {
        if data.column_index(name).is_none() {
            return Err(Error::UnknownFeature(name.clone()));
        }
    }
    let keep: Vec<usize> = (0..data.d)
        .filter(|&j| !names.iter().any(|n| n == &data.columns[j].name))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyInput("dropping every feature".into()));
    }
    let mut features = Vec::with_capacity(data.n * keep.len());
    for i in 0..data.n {
        let row = data.row(i);
        for &j in &keep {
            features.push(row[j]);
        }
    }
    Ok(DatasetMatrix {
        features,
        targets: data.targets.clone(),
        columns: keep.iter().map(|&j| data.columns[j].clone()).collect(),
        n: data.n,
        d: keep.len(),
    })
}

/// Synthetic XOR task with a label-leaking shortcut column.
///
/// Features are `[x1, x2, shortcut]` where `x1, x2` are ±1 plus Gaussian
/// noise and `y = 1` iff their signs differ. The shortcut equals the
/// ±1-mapped label (plus noise) with probability `leak_rate` and its
/// negation otherwise. All columns are z-scored over the sample.
pub fn gen_xor_shortcut(
    n: usize,
    leak_rate: f64,
    noise_std: f64,
    seed: u64,
) -> Result<DatasetMatrix> {
    if n < 4 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("{n} < 4"),
        });
    }
    if !(0.5..=1.0).contains(&leak_rate) {
        return Err(Error::InvalidParameter {
            name: "leak_rate",
            reason: format!("{leak_rate} not in [0.5, 1.0]"),
        });
    }
    if noise_std < 0.0 {
        return Err(Error::InvalidParameter {
            name: "noise_std",
            reason: format!("{noise_std} < 0"),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_std.max(f64::MIN_POSITIVE)).expect("valid std");
    let sample = |rng: &mut ChaCha8Rng, noise_std: f64| -> f64 {
        let base = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        if noise_std > 0.0 {
            base + noise.sample(rng)
        } else {
            base
        }
    };
    let mut cols = vec![Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = sample(&mut rng, noise_std);
        let x2 = sample(&mut rng, noise_std);
        let y: u8 = if x1.signum() * x2.signum() < 0.0 { 1 } else { 0 };
        let signed = 2.0 * y as f64 - 1.0;
        let leak = rng.gen_bool(leak_rate);
        let mut shortcut = if leak { signed } else { -signed };
        if noise_std > 0.0 {
            shortcut += noise.sample(&mut rng);
        }
        cols[0].push(x1);
        cols[1].push(x2);
        cols[2].push(shortcut);
        targets.push(y);
    }
    let names = ["x1", "x2", "shortcut"];
    let mut columns = Vec::new();
    let mut features = vec![0.0; n * 3];
    for (j, name) in names.iter().enumerate() {
        let (mean, std) = population_stats(&cols[j]);
        let std = std.max(STD_FLOOR);
        for i in 0..n {
            features[i * 3 + j] = (cols[j][i] - mean) / std;
        }
        columns.push(ColumnMeta {
            name: name.to_string(),
            info: ColumnInfo::Numeric { mean, std },
        });
    }
    Ok(DatasetMatrix {
        features,
        targets,
        columns,
        n,
        d: 3,
    })
}
